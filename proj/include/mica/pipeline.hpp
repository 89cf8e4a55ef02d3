#ifndef MICA_PIPELINE_HPP
#define MICA_PIPELINE_HPP

// Host/worker batch pipeline.
//
//   reader ──Batch──▶ [bounded queue] ──▶ group controller ×G ──▶ reorder ──▶ writer
//                                          │  worker pool ×W
//                                          └─ fallback for deferred reads
//
// A worker group stands in for one accelerator card: its controller hands a
// batch to the pool, workers pull 64-read chunks from a shared cursor, and
// any read that ran out of search budget comes back Deferred and is
// re-aligned by the controller with an unlimited budget.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mica/aligner.hpp"
#include "mica/concurrency.hpp"
#include "mica/io/reads.hpp"
#include "mica/io/sam.hpp"
#include "mica/reference_index.hpp"

namespace mica {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::size_t default_workers_per_group() {
  const unsigned hw = std::thread::hardware_concurrency();
  return 4 * static_cast<std::size_t>(hw == 0 ? 1 : hw);
}

struct PipelineConfig {
  std::size_t batch_size = 100'000;
  std::size_t worker_groups = 1;
  std::size_t workers_per_group = default_workers_per_group();
  AlignerConfig aligner;
  bool ordered_output = true;
  InsertModel insert;
  bool auto_insert = false;
  std::size_t max_secondary = 0;
  std::size_t chunk_size = 64;
  std::size_t queue_capacity = 4;
  std::size_t insert_sample_pairs = 10'000;

  void validate() const {
    if (batch_size == 0 || worker_groups == 0 || workers_per_group == 0 || chunk_size == 0 || queue_capacity == 0)
      throw std::invalid_argument("pipeline: counts must be at least 1");
    if (aligner.budget.max_hits == 0) throw std::invalid_argument("pipeline: max_hits must be at least 1");
    if (!supported_lane_count(aligner.lanes)) throw std::invalid_argument("pipeline: lanes must be 1, 4, 8 or 16");
    aligner.scoring.validate();
    insert.validate();
  }
};

struct Batch {
  std::uint64_t batch_id = 0;
  std::vector<Fragment> fragments;

  std::size_t read_count() const {
    std::size_t n = 0;
    for (const auto& f : fragments) n += f.read_count();
    return n;
  }
};

struct WorkerStats {
  std::uint64_t reads = 0;
  std::uint64_t states = 0;
  double seconds = 0;
};

/// Outcome of one read after the worker pass (and, for deferred reads, the
/// controller fallback).
struct ReadResult {
  ReadAlignment alignment;
  bool was_deferred = false;
};

struct BatchResult {
  Batch batch;                      // the reads, untouched
  std::vector<ReadResult> results;  // one per read, fragment-major, mate order
  std::vector<WorkerStats> workers;

  std::size_t deferred_pending() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const ReadResult& r) {
      return r.alignment.status == ReadStatus::Deferred;
    }));
  }
};

/// A controller's worker pool plus per-worker DP scratch.
class WorkerGroup {
 public:
  explicit WorkerGroup(std::size_t workers) : pool_(workers), scratch_(pool_.size()) {}

  WorkerPool& pool() { return pool_; }
  DiagonalWorkspace& scratch(std::size_t worker) { return scratch_[worker]; }
  DiagonalWorkspace& controller_scratch() { return controller_scratch_; }
  std::size_t size() const { return pool_.size(); }

 private:
  WorkerPool pool_;
  std::vector<DiagonalWorkspace> scratch_;
  DiagonalWorkspace controller_scratch_;
};

/// Align every read of `batch` on the group's workers. Reads that exhaust
/// `config.budget` come back Deferred with no candidates.
inline BatchResult dispatch_batch(Batch batch, WorkerGroup& group, const ReferenceIndex& index,
                                  const AlignerConfig& config, std::size_t chunk_size = 64) {
  std::vector<const ReadRecord*> reads;
  reads.reserve(batch.read_count());
  for (const auto& f : batch.fragments) {
    reads.push_back(&f.first);
    if (f.second) reads.push_back(&*f.second);
  }
  BatchResult out;
  out.results.resize(reads.size());
  out.workers.resize(group.size());
  std::atomic<std::size_t> cursor{0};
  const std::size_t total = reads.size();
  group.pool().run([&](std::size_t w) {
    const auto t0 = std::chrono::steady_clock::now();
    auto& stats = out.workers[w];
    auto& scratch = group.scratch(w);
    for (;;) {
      const std::size_t begin = cursor.fetch_add(chunk_size);
      if (begin >= total) break;
      const std::size_t end = std::min(total, begin + chunk_size);
      for (std::size_t k = begin; k < end; ++k) {
        const auto codes = encode(reads[k]->bases);
        auto& r = out.results[k];
        r.alignment = align_read(index, codes, config, config.budget, scratch);
        r.was_deferred = r.alignment.status == ReadStatus::Deferred;
        ++stats.reads;
        stats.states += r.alignment.states;
      }
    }
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  out.batch = std::move(batch);
  return out;
}

/// Controller pass: re-align every deferred read with the fallback budget.
inline void resolve_deferred(BatchResult& result, const ReferenceIndex& index, const AlignerConfig& config,
                             DiagonalWorkspace& scratch) {
  std::size_t k = 0;
  auto visit = [&](const ReadRecord& read) {
    auto& r = result.results[k++];
    if (r.alignment.status != ReadStatus::Deferred) return;
    const auto codes = encode(read.bases);
    r.alignment = fallback_align(index, codes, config, scratch);
  };
  for (const auto& f : result.batch.fragments) {
    visit(f.first);
    if (f.second) visit(*f.second);
  }
}

struct PipelineReport {
  std::uint64_t reads_total = 0;
  std::uint64_t fragments = 0;
  std::uint64_t aligned = 0;
  std::uint64_t unmapped = 0;
  std::uint64_t deferred = 0;
  std::uint64_t deferred_then_aligned = 0;
  std::uint64_t deferred_then_unmapped = 0;
  std::uint64_t paired_reads = 0;
  std::uint64_t properly_paired_reads = 0;
  std::uint64_t batches = 0;
  std::uint64_t skipped_records = 0;
  std::uint64_t search_states = 0;
  InsertModel insert;
  double wall_seconds = 0;

  /// Fraction of paired records carrying the proper-pair flag.
  double properly_paired() const {
    return paired_reads == 0 ? 0.0 : static_cast<double>(properly_paired_reads) / static_cast<double>(paired_reads);
  }
  double reads_per_second() const { return wall_seconds > 0 ? static_cast<double>(reads_total) / wall_seconds : 0.0; }

  std::string to_key_value() const {
    std::ostringstream os;
    os << "reads_total=" << reads_total << '\n'
       << "fragments=" << fragments << '\n'
       << "aligned=" << aligned << '\n'
       << "unmapped=" << unmapped << '\n'
       << "deferred=" << deferred << '\n'
       << "deferred_then_aligned=" << deferred_then_aligned << '\n'
       << "deferred_then_unmapped=" << deferred_then_unmapped << '\n'
       << "paired_reads=" << paired_reads << '\n'
       << "properly_paired_reads=" << properly_paired_reads << '\n'
       << std::fixed << std::setprecision(6) << "properly_paired=" << properly_paired() << '\n'
       << "insert_min=" << insert.min_insert << '\n'
       << "insert_max=" << insert.max_insert << '\n'
       << "batches=" << batches << '\n'
       << "skipped_records=" << skipped_records << '\n'
       << "search_states=" << search_states << '\n'
       << std::setprecision(3) << "wall_seconds=" << wall_seconds << '\n'
       << std::setprecision(1) << "reads_per_second=" << reads_per_second() << '\n';
    return os.str();
  }

  nlohmann::json to_json() const {
    return {{"reads_total", reads_total},
            {"fragments", fragments},
            {"aligned", aligned},
            {"unmapped", unmapped},
            {"deferred", deferred},
            {"deferred_then_aligned", deferred_then_aligned},
            {"deferred_then_unmapped", deferred_then_unmapped},
            {"paired_reads", paired_reads},
            {"properly_paired_reads", properly_paired_reads},
            {"properly_paired", properly_paired()},
            {"insert_min", insert.min_insert},
            {"insert_max", insert.max_insert},
            {"batches", batches},
            {"skipped_records", skipped_records},
            {"search_states", search_states},
            {"wall_seconds", wall_seconds},
            {"reads_per_second", reads_per_second()}};
  }
};

namespace detail {

// Single-threaded tail of the pipeline: pairing, SAM formatting, accounting.
class RecordEmitter {
 public:
  RecordEmitter(const PipelineConfig& config, const SamHeader& header, std::ostream& sink, PipelineReport& report)
      : config_(config), header_(header), sink_(sink), report_(report), model_(config.insert) {
    model_fixed_ = !config.auto_insert;
  }

  void start() {
    sink_ << format_header(header_);
    check_sink();
  }

  void accept(BatchResult result) {
    if (model_fixed_) {
      emit(result);
      return;
    }
    sample_inserts(result);
    held_.push_back(std::move(result));
    if (samples_.size() >= config_.insert_sample_pairs) fix_model_and_flush();
  }

  void finish() {
    if (!model_fixed_) fix_model_and_flush();
    sink_.flush();
    check_sink();
    report_.insert = model_;
  }

 private:
  void sample_inserts(const BatchResult& result) {
    std::size_t k = 0;
    for (const auto& f : result.batch.fragments) {
      if (!f.second) {
        ++k;
        continue;
      }
      const auto& c1 = result.results[k].alignment.candidates;
      const auto& c2 = result.results[k + 1].alignment.candidates;
      k += 2;
      if (samples_.size() >= config_.insert_sample_pairs) continue;
      if (c1.size() != 1 || c2.size() != 1) continue;
      if (auto tlen = fr_template_length(c1[0], c2[0])) samples_.push_back(*tlen);
    }
  }

  void fix_model_and_flush() {
    if (auto m = estimate_insert_model(samples_)) model_ = *m;
    model_fixed_ = true;
    for (auto& r : held_) emit(r);
    held_.clear();
  }

  void emit(const BatchResult& result) {
    buffer_.clear();
    std::size_t k = 0;
    for (const auto& f : result.batch.fragments) {
      ++report_.fragments;
      if (f.second) {
        const auto& a = result.results[k];
        const auto& b = result.results[k + 1];
        auto recs = resolve_pair(f.first, a.alignment.candidates, *f.second, b.alignment.candidates, model_,
                                 config_.max_secondary);
        account(recs.first, a, true);
        account(recs.second, b, true);
        append_record(buffer_, recs.first, header_.sequences);
        append_record(buffer_, recs.second, header_.sequences);
        for (const auto& s : recs.secondary) append_record(buffer_, s, header_.sequences);
        k += 2;
      } else {
        const auto& a = result.results[k++];
        auto recs = single_end_records(f.first, a.alignment.candidates, config_.max_secondary);
        account(recs.front(), a, false);
        for (const auto& r : recs) append_record(buffer_, r, header_.sequences);
      }
    }
    sink_ << buffer_;
    check_sink();
    ++report_.batches;
  }

  void account(const AlignmentRecord& primary, const ReadResult& r, bool paired) {
    ++report_.reads_total;
    report_.search_states += r.alignment.states;
    const bool mapped = primary.mapped();
    ++(mapped ? report_.aligned : report_.unmapped);
    if (r.was_deferred) {
      ++report_.deferred;
      ++(mapped ? report_.deferred_then_aligned : report_.deferred_then_unmapped);
    }
    if (paired) {
      ++report_.paired_reads;
      if (primary.has(sam_flag::kProperPair)) ++report_.properly_paired_reads;
    }
  }

  void check_sink() {
    if (!sink_) throw PipelineError("SAM sink write failed; output is partial");
  }

  const PipelineConfig& config_;
  const SamHeader& header_;
  std::ostream& sink_;
  PipelineReport& report_;
  InsertModel model_;
  bool model_fixed_ = true;
  std::vector<std::int64_t> samples_;
  std::vector<BatchResult> held_;
  std::string buffer_;
};

}  // namespace detail

/// Run the full pipeline from `source` to SAM text on `sink`.
inline PipelineReport run_pipeline(FragmentSource& source, const ReferenceIndex& index, const PipelineConfig& config,
                                   std::ostream& sink, const SamHeader& header) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  PipelineReport report;

  BoundedQueue<Batch> batches(config.queue_capacity);
  ReorderChannel<BatchResult> results(config.ordered_output, config.queue_capacity + config.worker_groups,
                                      config.worker_groups);
  std::mutex error_mu;
  std::exception_ptr error;
  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lk(error_mu);
      if (!error) error = e;
    }
    batches.close();
    results.abort();
  };

  std::thread reader([&] {
    try {
      std::uint64_t id = 0;
      for (;;) {
        Batch b;
        b.batch_id = id;
        while (b.fragments.size() < config.batch_size) {
          auto f = source.next();
          if (!f) break;
          b.fragments.push_back(std::move(*f));
        }
        if (b.fragments.empty()) break;
        const bool last = b.fragments.size() < config.batch_size;
        if (!batches.push(std::move(b))) break;
        ++id;
        if (last) break;
      }
    } catch (...) {
      fail(std::current_exception());
    }
    batches.close();
  });

  std::vector<std::thread> controllers;
  for (std::size_t g = 0; g < config.worker_groups; ++g) {
    controllers.emplace_back([&] {
      try {
        WorkerGroup group(config.workers_per_group);
        while (auto b = batches.pop()) {
          const auto id = b->batch_id;
          auto r = dispatch_batch(std::move(*b), group, index, config.aligner, config.chunk_size);
          resolve_deferred(r, index, config.aligner, group.controller_scratch());
          if (!results.put(id, std::move(r))) break;
        }
      } catch (...) {
        fail(std::current_exception());
      }
      results.producer_done();
    });
  }

  try {
    detail::RecordEmitter emitter(config, header, sink, report);
    emitter.start();
    while (auto r = results.take()) emitter.accept(std::move(*r));
    {
      std::lock_guard lk(error_mu);
      if (!error) emitter.finish();
    }
  } catch (...) {
    fail(std::current_exception());
  }

  reader.join();
  for (auto& c : controllers) c.join();
  if (error) std::rethrow_exception(error);

  report.skipped_records = source.skipped();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace mica

#endif  // MICA_PIPELINE_HPP
