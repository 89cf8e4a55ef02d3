#ifndef MICA_SEED_SEARCH_HPP
#define MICA_SEED_SEARCH_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "mica/dna.hpp"
#include "mica/reference_index.hpp"

namespace mica {

struct SeedHit {
  std::uint32_t seq_id = 0;
  std::uint64_t offset = 0;
  Strand strand = Strand::Forward;
  std::uint32_t mismatches = 0;
  std::int32_t seed_score = 0;  // matching bases; higher ranks first

  friend bool operator==(const SeedHit&, const SeedHit&) = default;
};

/// Canonical hit order: fewest mismatches, then (sequence, offset, forward first).
inline bool hit_order(const SeedHit& a, const SeedHit& b) {
  if (a.mismatches != b.mismatches) return a.mismatches < b.mismatches;
  if (a.seq_id != b.seq_id) return a.seq_id < b.seq_id;
  if (a.offset != b.offset) return a.offset < b.offset;
  return a.strand < b.strand;
}

enum class HitOverflow : std::uint8_t {
  Exceed,    // crossing max_hits aborts the search (worker path)
  Truncate,  // keep the best max_hits hits (controller fallback path)
};

struct SearchBudget {
  static constexpr std::uint64_t kUnlimited = std::numeric_limits<std::uint64_t>::max();

  std::uint32_t max_mismatches = 2;
  std::uint64_t max_hits = 64;
  std::uint64_t max_states = 8192;
  HitOverflow overflow = HitOverflow::Exceed;

  static SearchBudget unlimited(std::uint32_t k) { return {k, kUnlimited, kUnlimited, HitOverflow::Exceed}; }
};

inline constexpr std::size_t kDefaultMinSeedLength = 17;

struct SearchOutcome {
  enum class Status : std::uint8_t { Hits, NoHit, ExceededBudget };

  Status status = Status::NoHit;
  std::vector<SeedHit> hits;
  std::uint64_t states = 0;  // search nodes expanded

  bool has_hits() const { return status == Status::Hits; }
  bool exceeded() const { return status == Status::ExceededBudget; }
};

namespace detail {

struct PendingRange {
  SARange range;
  std::uint32_t mismatches;
};

class MismatchSearcher {
 public:
  MismatchSearcher(const ReferenceIndex& index, std::span<const BaseCode> read, const SearchBudget& budget)
      : index_(index), read_(read), budget_(budget) {}

  // Returns false once the budget is exhausted.
  bool run() { return descend(index_.full_range(), read_.size(), 0); }

  std::uint64_t states() const { return states_; }
  std::uint64_t hit_rows() const { return hit_rows_; }
  std::vector<PendingRange>& ranges() { return ranges_; }

 private:
  // `remaining` read bases (read_[0, remaining)) are still to be matched,
  // extending right to left from the 3' end.
  bool descend(SARange range, std::size_t remaining, std::uint32_t mismatches) {
    if (++states_ > budget_.max_states) return false;
    if (remaining == 0) {
      ranges_.push_back({range, mismatches});
      hit_rows_ += range.width();
      return budget_.overflow == HitOverflow::Truncate || hit_rows_ <= budget_.max_hits;
    }
    const BaseCode want = read_[remaining - 1];
    if (want <= 3) {
      const SARange next = index_.backward_extend(range, want);
      if (!next.empty() && !descend(next, remaining - 1, mismatches)) return false;
    }
    if (mismatches < budget_.max_mismatches) {
      for (BaseCode b = 0; b < 4; ++b) {
        if (b == want) continue;
        const SARange next = index_.backward_extend(range, b);
        if (!next.empty() && !descend(next, remaining - 1, mismatches + 1)) return false;
      }
    }
    return true;
  }

  const ReferenceIndex& index_;
  std::span<const BaseCode> read_;
  const SearchBudget& budget_;
  std::uint64_t states_ = 0;
  std::uint64_t hit_rows_ = 0;
  std::vector<PendingRange> ranges_;
};

}  // namespace detail

/// Depth-first backward search for all placements of `read` (either strand)
/// within `budget.max_mismatches` substitutions. Ambiguous read bases always
/// count as mismatches.
inline SearchOutcome mismatch_search(const ReferenceIndex& index, std::span<const BaseCode> read,
                                     const SearchBudget& budget,
                                     std::size_t min_seed_length = kDefaultMinSeedLength) {
  if (read.size() < min_seed_length || read.empty())
    throw std::invalid_argument("mismatch_search: read shorter than minimum seed length");

  detail::MismatchSearcher searcher(index, read, budget);
  SearchOutcome outcome;
  const bool completed = searcher.run();
  outcome.states = searcher.states();
  if (!completed) {
    outcome.status = SearchOutcome::Status::ExceededBudget;
    return outcome;
  }

  const auto len = static_cast<std::uint64_t>(read.size());
  for (const auto& pending : searcher.ranges()) {
    for (auto pos : index.locate(pending.range, pending.range.width())) {
      if (auto locus = index.resolve(pos, len)) {
        outcome.hits.push_back({locus->seq_id, locus->offset, locus->strand, pending.mismatches,
                                static_cast<std::int32_t>(len - pending.mismatches)});
      }
    }
  }
  std::sort(outcome.hits.begin(), outcome.hits.end(), hit_order);
  outcome.hits.erase(std::unique(outcome.hits.begin(), outcome.hits.end(),
                                 [](const SeedHit& a, const SeedHit& b) {
                                   return a.seq_id == b.seq_id && a.offset == b.offset && a.strand == b.strand;
                                 }),
                     outcome.hits.end());
  if (budget.overflow == HitOverflow::Truncate && outcome.hits.size() > budget.max_hits)
    outcome.hits.resize(budget.max_hits);
  outcome.status = outcome.hits.empty() ? SearchOutcome::Status::NoHit : SearchOutcome::Status::Hits;
  return outcome;
}

}  // namespace mica

#endif  // MICA_SEED_SEARCH_HPP
