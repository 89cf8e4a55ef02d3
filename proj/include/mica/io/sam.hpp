#ifndef MICA_IO_SAM_HPP
#define MICA_IO_SAM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mica/aligner.hpp"
#include "mica/dna.hpp"
#include "mica/dp/cigar.hpp"
#include "mica/io/reads.hpp"
#include "mica/reference_index.hpp"

namespace mica {

namespace sam_flag {
inline constexpr std::uint16_t kPaired = 0x1;
inline constexpr std::uint16_t kProperPair = 0x2;
inline constexpr std::uint16_t kUnmapped = 0x4;
inline constexpr std::uint16_t kMateUnmapped = 0x8;
inline constexpr std::uint16_t kReverse = 0x10;
inline constexpr std::uint16_t kMateReverse = 0x20;
inline constexpr std::uint16_t kFirst = 0x40;
inline constexpr std::uint16_t kSecond = 0x80;
inline constexpr std::uint16_t kSecondary = 0x100;
}  // namespace sam_flag

struct AlignmentRecord {
  std::string name;
  std::uint16_t flags = 0;
  std::int64_t ref_id = -1;  // -1 prints as '*'
  std::uint64_t pos = 0;     // 1-based, 0 when unplaced
  std::uint8_t mapq = 0;
  Cigar cigar;               // empty prints as '*'
  std::int64_t mate_ref_id = -1;
  std::uint64_t mate_pos = 0;
  std::int64_t template_length = 0;
  std::string bases;
  std::string qualities;     // empty prints as '*'
  std::optional<int> alignment_score;
  std::optional<std::uint32_t> edit_distance;

  bool has(std::uint16_t f) const { return (flags & f) != 0; }
  bool mapped() const { return !has(sam_flag::kUnmapped); }
  bool primary() const { return !has(sam_flag::kSecondary); }
  std::uint64_t end_pos() const { return pos + cigar.reference_length(); }  // 1-based exclusive

  friend bool operator==(const AlignmentRecord&, const AlignmentRecord&) = default;
};

/// Mapping quality from the best and runner-up alignment scores.
inline int mapq_estimate(int best_score, std::optional<int> second_best_score, std::size_t hit_count) {
  int q = 60;
  if (second_best_score) q = std::clamp(6 * (best_score - *second_best_score), 0, 60);
  if (hit_count > 32) q = std::min(q, 3);
  return q;
}

/// Accepted template-length window for forward-reverse pairs.
struct InsertModel {
  std::int64_t min_insert = 100;
  std::int64_t max_insert = 1000;

  void validate() const {
    if (min_insert <= 0 || min_insert > max_insert) throw std::invalid_argument("insert model: need 0 < min <= max");
  }
  bool accepts(std::int64_t tlen) const { return tlen >= min_insert && tlen <= max_insert; }
  friend bool operator==(const InsertModel&, const InsertModel&) = default;
};

/// Template length of two placements on the same sequence, when they form a
/// forward-reverse pair: forward mate leftmost, reverse mate ending at or
/// after the forward start.
inline std::optional<std::int64_t> fr_template_length(const Placement& a, const Placement& b) {
  if (a.seq_id != b.seq_id || a.strand == b.strand) return std::nullopt;
  const Placement& fwd = a.strand == Strand::Forward ? a : b;
  const Placement& rev = a.strand == Strand::Forward ? b : a;
  if (fwd.pos > rev.pos) return std::nullopt;
  return static_cast<std::int64_t>(rev.end()) - static_cast<std::int64_t>(fwd.pos);
}

/// Median +/- 4 MAD over observed template lengths; nullopt when empty.
inline std::optional<InsertModel> estimate_insert_model(std::vector<std::int64_t> lengths) {
  if (lengths.empty()) return std::nullopt;
  auto median = [](std::vector<std::int64_t>& v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? static_cast<double>(v[n / 2]) : (static_cast<double>(v[n / 2 - 1]) + v[n / 2]) / 2.0;
  };
  const double med = median(lengths);
  std::vector<std::int64_t> dev;
  dev.reserve(lengths.size());
  for (auto x : lengths) dev.push_back(static_cast<std::int64_t>(std::llround(std::abs(static_cast<double>(x) - med))));
  const double mad = median(dev);
  InsertModel m;
  m.min_insert = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(med - 4 * mad)));
  m.max_insert = std::max<std::int64_t>(m.min_insert, static_cast<std::int64_t>(std::ceil(med + 4 * mad)));
  return m;
}

namespace detail {

inline std::optional<int> runner_up(std::span<const Placement> cands, std::size_t chosen) {
  std::optional<int> best;
  for (std::size_t k = 0; k < cands.size(); ++k)
    if (k != chosen && (!best || cands[k].score > *best)) best = cands[k].score;
  return best;
}

inline void fill_placed(AlignmentRecord& rec, const ReadRecord& read, std::span<const Placement> cands,
                        std::size_t chosen) {
  const Placement& p = cands[chosen];
  rec.ref_id = p.seq_id;
  rec.pos = p.pos + 1;
  rec.cigar = p.cigar;
  rec.alignment_score = p.score;
  rec.edit_distance = p.edit_distance;
  rec.mapq = static_cast<std::uint8_t>(mapq_estimate(p.score, runner_up(cands, chosen), cands.size()));
  if (p.strand == Strand::Reverse) {
    rec.flags |= sam_flag::kReverse;
    rec.bases = reverse_complement(read.bases);
    rec.qualities.assign(read.qualities.rbegin(), read.qualities.rend());
  } else {
    rec.bases = read.bases;
    rec.qualities = read.qualities;
  }
}

inline AlignmentRecord base_record(const ReadRecord& read) {
  AlignmentRecord rec;
  rec.name = read.name;
  rec.bases = read.bases;
  rec.qualities = read.qualities;
  return rec;
}

}  // namespace detail

/// Primary (and optionally secondary) records for a single-end read.
inline std::vector<AlignmentRecord> single_end_records(const ReadRecord& read, std::span<const Placement> cands,
                                                       std::size_t max_secondary = 0) {
  std::vector<AlignmentRecord> out;
  AlignmentRecord rec = detail::base_record(read);
  if (cands.empty()) {
    rec.flags = sam_flag::kUnmapped;
    out.push_back(std::move(rec));
    return out;
  }
  detail::fill_placed(rec, read, cands, 0);
  out.push_back(rec);
  for (std::size_t k = 1; k < cands.size() && k <= max_secondary; ++k) {
    AlignmentRecord sec = detail::base_record(read);
    sec.flags = sam_flag::kSecondary;
    detail::fill_placed(sec, read, cands, k);
    out.push_back(std::move(sec));
  }
  return out;
}

struct PairRecords {
  AlignmentRecord first;
  AlignmentRecord second;
  std::vector<AlignmentRecord> secondary;
  bool proper = false;
};

/// Choose placements for both mates. The concordant pair (same sequence,
/// forward-reverse, template length inside the model) with the highest
/// combined score wins and is flagged proper; otherwise each mate takes its
/// own best candidate.
inline PairRecords resolve_pair(const ReadRecord& read1, std::span<const Placement> cands1, const ReadRecord& read2,
                                std::span<const Placement> cands2, const InsertModel& model,
                                std::size_t max_secondary = 0) {
  std::optional<std::size_t> pick1, pick2;
  bool proper = false;
  long best_sum = 0;
  for (std::size_t a = 0; a < cands1.size(); ++a) {
    for (std::size_t b = 0; b < cands2.size(); ++b) {
      const auto tlen = fr_template_length(cands1[a], cands2[b]);
      if (!tlen || !model.accepts(*tlen)) continue;
      const long sum = static_cast<long>(cands1[a].score) + cands2[b].score;
      if (!proper || sum > best_sum) {
        proper = true;
        best_sum = sum;
        pick1 = a;
        pick2 = b;
      }
    }
  }
  if (!proper) {
    if (!cands1.empty()) pick1 = 0;
    if (!cands2.empty()) pick2 = 0;
  }

  PairRecords out;
  out.proper = proper;
  AlignmentRecord& r1 = out.first;
  AlignmentRecord& r2 = out.second;
  r1 = detail::base_record(read1);
  r2 = detail::base_record(read2);
  r1.flags = sam_flag::kPaired | sam_flag::kFirst;
  r2.flags = sam_flag::kPaired | sam_flag::kSecond;
  if (proper) {
    r1.flags |= sam_flag::kProperPair;
    r2.flags |= sam_flag::kProperPair;
  }
  if (pick1) detail::fill_placed(r1, read1, cands1, *pick1);
  else r1.flags |= sam_flag::kUnmapped;
  if (pick2) detail::fill_placed(r2, read2, cands2, *pick2);
  else r2.flags |= sam_flag::kUnmapped;

  // An unmapped mate sits at its partner's position.
  if (pick1 && !pick2) {
    r2.ref_id = r1.ref_id;
    r2.pos = r1.pos;
  } else if (pick2 && !pick1) {
    r1.ref_id = r2.ref_id;
    r1.pos = r2.pos;
  }

  auto cross_fill = [](AlignmentRecord& self, const AlignmentRecord& mate) {
    if (!mate.mapped()) self.flags |= sam_flag::kMateUnmapped;
    if (mate.has(sam_flag::kReverse)) self.flags |= sam_flag::kMateReverse;
    self.mate_ref_id = mate.ref_id;
    self.mate_pos = mate.pos;
  };
  cross_fill(r1, r2);
  cross_fill(r2, r1);

  if (pick1 && pick2 && r1.ref_id == r2.ref_id) {
    const auto s1 = static_cast<std::int64_t>(r1.pos), e1 = static_cast<std::int64_t>(r1.end_pos());
    const auto s2 = static_cast<std::int64_t>(r2.pos), e2 = static_cast<std::int64_t>(r2.end_pos());
    const std::int64_t span = std::max(e1, e2) - std::min(s1, s2);
    const bool first_leftmost = s1 < s2 || (s1 == s2 && !r1.has(sam_flag::kReverse));
    r1.template_length = first_leftmost ? span : -span;
    r2.template_length = -r1.template_length;
  }

  auto add_secondary = [&](const ReadRecord& read, std::span<const Placement> cands, std::optional<std::size_t> pick,
                           const AlignmentRecord& primary) {
    std::size_t emitted = 0;
    for (std::size_t k = 0; k < cands.size() && emitted < max_secondary; ++k) {
      if (pick && k == *pick) continue;
      AlignmentRecord sec = detail::base_record(read);
      sec.flags = static_cast<std::uint16_t>(
          sam_flag::kSecondary | (primary.flags & (sam_flag::kPaired | sam_flag::kFirst | sam_flag::kSecond |
                                                   sam_flag::kMateUnmapped | sam_flag::kMateReverse)));
      detail::fill_placed(sec, read, cands, k);
      sec.mate_ref_id = primary.mate_ref_id;
      sec.mate_pos = primary.mate_pos;
      out.secondary.push_back(std::move(sec));
      ++emitted;
    }
  };
  add_secondary(read1, cands1, pick1, r1);
  add_secondary(read2, cands2, pick2, r2);
  return out;
}

struct SamHeader {
  std::vector<SequenceInfo> sequences;
  std::string program_name = "mica";
  std::string program_version = "0.1.0";
  std::string command_line;

  static SamHeader from_index(const ReferenceIndex& index, std::string command_line = {}) {
    SamHeader h;
    h.sequences = index.sequences();
    h.command_line = std::move(command_line);
    return h;
  }
};

inline std::string format_header(const SamHeader& h) {
  std::string out = "@HD\tVN:1.6\tSO:unsorted\n";
  for (const auto& s : h.sequences) out += "@SQ\tSN:" + s.name + "\tLN:" + std::to_string(s.length) + "\n";
  out += "@PG\tID:" + h.program_name + "\tPN:" + h.program_name + "\tVN:" + h.program_version;
  if (!h.command_line.empty()) out += "\tCL:" + h.command_line;
  out += "\n";
  return out;
}

inline void append_record(std::string& out, const AlignmentRecord& r, std::span<const SequenceInfo> seqs) {
  auto ref_name = [&](std::int64_t id) -> const std::string& {
    static const std::string kStar = "*";
    return id < 0 ? kStar : seqs[static_cast<std::size_t>(id)].name;
  };
  out += r.name;
  out += '\t';
  out += std::to_string(r.flags);
  out += '\t';
  out += ref_name(r.ref_id);
  out += '\t';
  out += std::to_string(r.pos);
  out += '\t';
  out += std::to_string(r.mapq);
  out += '\t';
  out += r.mapped() ? r.cigar.to_string() : "*";
  out += '\t';
  if (r.mate_ref_id < 0) out += '*';
  else if (r.mate_ref_id == r.ref_id) out += '=';
  else out += ref_name(r.mate_ref_id);
  out += '\t';
  out += std::to_string(r.mate_pos);
  out += '\t';
  out += std::to_string(r.template_length);
  out += '\t';
  out += r.bases.empty() ? "*" : r.bases;
  out += '\t';
  out += r.qualities.empty() ? "*" : r.qualities;
  if (r.alignment_score) out += "\tAS:i:" + std::to_string(*r.alignment_score);
  if (r.edit_distance) out += "\tNM:i:" + std::to_string(*r.edit_distance);
  out += '\n';
}

inline std::string format_record(const AlignmentRecord& r, std::span<const SequenceInfo> seqs) {
  std::string out;
  append_record(out, r, seqs);
  return out;
}

inline void write_sam(const SamHeader& header, std::span<const AlignmentRecord> records, std::ostream& sink) {
  sink << format_header(header);
  std::string buf;
  for (const auto& r : records) append_record(buf, r, header.sequences);
  sink << buf;
  sink.flush();
  if (!sink) throw std::runtime_error("SAM sink write failed");
}

}  // namespace mica

#endif  // MICA_IO_SAM_HPP
