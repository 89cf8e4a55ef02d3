#ifndef MICA_REFERENCE_INDEX_HPP
#define MICA_REFERENCE_INDEX_HPP

// FM-index over the forward reference concatenated with its reverse
// complement and a single terminal sentinel:
//
//   text = fwd(seq_0) fwd(seq_1) ... rc(fwd(seq_0) fwd(seq_1) ...) $
//
// BWT symbols are kept 2-bit packed; the sentinel row stores an 'A' that the
// occurrence routine corrects for. Occurrence checkpoints every 128 rows.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mica/dna.hpp"
#include "mica/suffix_array.hpp"

namespace mica {

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NamedSequence {
  std::string name;
  std::string bases;
};

/// Half-open interval of BWT rows.
struct SARange {
  std::uint64_t low = 0;
  std::uint64_t high = 0;

  std::uint64_t width() const { return high - low; }
  bool empty() const { return high <= low; }
  friend bool operator==(const SARange&, const SARange&) = default;
};

struct SequenceInfo {
  std::string name;
  std::uint64_t length = 0;
  std::uint64_t offset = 0;  // start within the forward concatenation
  friend bool operator==(const SequenceInfo&, const SequenceInfo&) = default;
};

/// A text occurrence mapped back onto one reference sequence.
struct Locus {
  std::uint32_t seq_id = 0;
  std::uint64_t offset = 0;  // leftmost forward-strand coordinate
  Strand strand = Strand::Forward;
  friend bool operator==(const Locus&, const Locus&) = default;
};

struct IndexParams {
  std::uint32_t sa_sampling = 8;
  std::uint64_t ambiguity_seed = 0x4d49434121ULL;
  friend bool operator==(const IndexParams&, const IndexParams&) = default;
};

struct IndexMeta {
  std::vector<SequenceInfo> sequences;
  IndexParams params;
  std::vector<std::uint64_t> replaced_positions;  // forward-concatenation coordinates
  friend bool operator==(const IndexMeta&, const IndexMeta&) = default;
};

class ReferenceIndex {
 public:
  static constexpr std::uint64_t kOccInterval = 128;
  static constexpr std::uint64_t kWordsPerBlock = kOccInterval / 32;
  static constexpr BaseCode kSentinel = 4;  // symbol_at() result for the '$' row

  ReferenceIndex() = default;

  /// Number of rows, i.e. text length including the sentinel (N + 1).
  std::uint64_t rows() const { return rows_; }
  /// Indexed text length without the sentinel (N = 2 * forward length).
  std::uint64_t text_length() const { return rows_ == 0 ? 0 : rows_ - 1; }
  std::uint64_t forward_length() const { return text_length() / 2; }
  std::uint64_t primary_row() const { return primary_; }

  /// C array: symbols in the text smaller than `base`, sentinel included.
  std::uint64_t count_smaller(BaseCode base) const { return counts_[base]; }

  BaseCode symbol_at(std::uint64_t row) const {
    if (row == primary_) return kSentinel;
    return static_cast<BaseCode>((bwt_[row >> 5] >> ((row & 31) * 2)) & 3u);
  }

  /// Occurrences of `base` in bwt[0, prefix).
  std::uint64_t occ(std::uint64_t prefix, BaseCode base) const {
    const std::uint64_t block = prefix / kOccInterval;
    std::uint64_t n = occ_[block * 4 + base];
    const std::uint64_t first_word = block * kWordsPerBlock;
    const std::uint64_t full_words = (prefix - block * kOccInterval) / 32;
    for (std::uint64_t w = 0; w < full_words; ++w) n += count_in_word(bwt_[first_word + w], base, 32);
    const std::uint64_t rest = prefix & 31;
    if (rest != 0) n += count_in_word(bwt_[first_word + full_words], base, rest);
    if (base == kBaseA && primary_ >= block * kOccInterval && primary_ < prefix) --n;
    return n;
  }

  SARange full_range() const { return {0, rows_}; }

  SARange backward_extend(SARange range, BaseCode base) const {
    if (base > 3 || range.empty()) return {range.low, range.low};
    return {counts_[base] + occ(range.low, base), counts_[base] + occ(range.high, base)};
  }

  /// LF mapping. Undefined for the sentinel row.
  std::uint64_t lf(std::uint64_t row) const {
    const BaseCode b = symbol_at(row);
    return counts_[b] + occ(row, b);
  }

  /// Text position of the suffix at `row`.
  std::uint64_t suffix_position(std::uint64_t row) const {
    std::uint64_t steps = 0;
    const std::uint64_t s = meta_.params.sa_sampling;
    while (row % s != 0) {
      if (row == primary_) return steps;
      row = lf(row);
      ++steps;
    }
    return sa_samples_[row / s] + steps;
  }

  /// Up to `limit` text positions of the rows in `range`, in row order.
  std::vector<std::uint64_t> locate(SARange range, std::uint64_t limit) const {
    std::vector<std::uint64_t> out;
    if (range.empty()) return out;
    const std::uint64_t n = std::min(range.width(), limit);
    out.reserve(n);
    for (std::uint64_t r = range.low; r < range.low + n; ++r) out.push_back(suffix_position(r));
    return out;
  }

  /// Map a text occurrence of length `len` back to a reference sequence.
  /// Occurrences that straddle a sequence or strand boundary yield nullopt.
  std::optional<Locus> resolve(std::uint64_t text_pos, std::uint64_t len) const {
    const std::uint64_t fwd = forward_length();
    if (len == 0 || text_pos + len > 2 * fwd) return std::nullopt;
    Locus locus;
    std::uint64_t start;
    if (text_pos + len <= fwd) {
      start = text_pos;
      locus.strand = Strand::Forward;
    } else if (text_pos >= fwd) {
      start = 2 * fwd - text_pos - len;
      locus.strand = Strand::Reverse;
    } else {
      return std::nullopt;
    }
    const auto id = sequence_containing(start);
    const auto& seq = meta_.sequences[id];
    if (start + len > seq.offset + seq.length) return std::nullopt;
    locus.seq_id = id;
    locus.offset = start - seq.offset;
    return locus;
  }

  std::uint32_t sequence_containing(std::uint64_t concat_pos) const {
    const auto& seqs = meta_.sequences;
    auto it = std::upper_bound(seqs.begin(), seqs.end(), concat_pos,
                               [](std::uint64_t p, const SequenceInfo& s) { return p < s.offset; });
    return static_cast<std::uint32_t>(std::distance(seqs.begin(), it) - 1);
  }

  /// Exact occurrence count of `pattern` in the indexed text (both strands).
  std::uint64_t count_occurrences(std::string_view pattern) const {
    if (pattern.empty()) throw std::invalid_argument("count_occurrences: empty pattern");
    SARange range = full_range();
    for (auto it = pattern.rbegin(); it != pattern.rend(); ++it) {
      const BaseCode b = encode_base(*it);
      if (b > 3) throw std::invalid_argument("count_occurrences: pattern contains non-ACGT symbol");
      range = backward_extend(range, b);
      if (range.empty()) return 0;
    }
    return range.width();
  }

  SARange search(std::span<const BaseCode> pattern) const {
    SARange range = full_range();
    for (auto it = pattern.rbegin(); it != pattern.rend() && !range.empty(); ++it)
      range = backward_extend(range, *it);
    return range;
  }

  const PackedBases& reference() const { return ref_; }
  const IndexMeta& meta() const { return meta_; }
  const std::vector<SequenceInfo>& sequences() const { return meta_.sequences; }
  std::size_t replaced_count() const { return meta_.replaced_positions.size(); }

  /// Forward-strand bases [begin, end) of one sequence.
  std::vector<BaseCode> sequence_slice(std::uint32_t seq_id, std::uint64_t begin, std::uint64_t end) const {
    const auto& s = meta_.sequences.at(seq_id);
    if (begin > end || end > s.length) throw std::out_of_range("sequence_slice: span outside sequence");
    return ref_.slice(s.offset + begin, s.offset + end);
  }

  // Raw sections, for serialization.
  const std::vector<std::uint64_t>& bwt_words() const { return bwt_; }
  const std::vector<std::uint64_t>& occ_checkpoints() const { return occ_; }
  const std::vector<std::uint32_t>& sa_samples() const { return sa_samples_; }
  const std::array<std::uint64_t, 5>& counts() const { return counts_; }

  struct Parts {
    std::uint64_t rows = 0;
    std::uint64_t primary = 0;
    std::array<std::uint64_t, 5> counts{};
    std::vector<std::uint64_t> bwt;
    std::vector<std::uint64_t> occ;
    std::vector<std::uint32_t> sa_samples;
    PackedBases ref;
    IndexMeta meta;
  };

  static ReferenceIndex from_parts(Parts p) {
    ReferenceIndex idx;
    idx.rows_ = p.rows;
    idx.primary_ = p.primary;
    idx.counts_ = p.counts;
    idx.bwt_ = std::move(p.bwt);
    idx.occ_ = std::move(p.occ);
    idx.sa_samples_ = std::move(p.sa_samples);
    idx.ref_ = std::move(p.ref);
    idx.meta_ = std::move(p.meta);
    idx.validate_shape();
    return idx;
  }

  friend ReferenceIndex build_index(std::span<const NamedSequence> reference, IndexParams params);

 private:
  static std::uint64_t count_in_word(std::uint64_t word, BaseCode base, std::uint64_t symbols) {
    constexpr std::uint64_t kLow = 0x5555555555555555ULL;
    const std::uint64_t x = word ^ (kLow * base);
    std::uint64_t match = ~(x | (x >> 1)) & kLow;
    if (symbols < 32) match &= (std::uint64_t{1} << (2 * symbols)) - 1;
    return static_cast<std::uint64_t>(std::popcount(match));
  }

  void validate_shape() const {
    const std::uint64_t s = meta_.params.sa_sampling;
    if (s == 0) throw std::invalid_argument("index: zero sampling rate");
    if (rows_ < 3 || rows_ % 2 == 0) throw std::invalid_argument("index: bad row count");
    if (primary_ >= rows_) throw std::invalid_argument("index: primary row out of range");
    if (bwt_.size() != (rows_ + kOccInterval - 1) / kOccInterval * kWordsPerBlock)
      throw std::invalid_argument("index: bwt size mismatch");
    if (occ_.size() != (rows_ / kOccInterval + 1) * 4) throw std::invalid_argument("index: occ size mismatch");
    if (sa_samples_.size() != (rows_ + s - 1) / s) throw std::invalid_argument("index: sa sample count mismatch");
    if (ref_.size() != forward_length()) throw std::invalid_argument("index: reference length mismatch");
  }

  std::uint64_t rows_ = 0;
  std::uint64_t primary_ = 0;
  std::array<std::uint64_t, 5> counts_{};
  std::vector<std::uint64_t> bwt_;
  std::vector<std::uint64_t> occ_;
  std::vector<std::uint32_t> sa_samples_;
  PackedBases ref_;
  IndexMeta meta_;
};

/// Build the index. Non-ACGT bases are replaced by bases drawn from a
/// generator seeded with params.ambiguity_seed; their positions are kept in
/// meta().replaced_positions.
inline ReferenceIndex build_index(std::span<const NamedSequence> reference, IndexParams params = {}) {
  if (params.sa_sampling == 0) throw BuildError("sampling rate must be positive");
  if (reference.empty()) throw BuildError("empty reference");

  ReferenceIndex idx;
  idx.meta_.params = params;
  std::unordered_set<std::string> seen;
  std::uint64_t total = 0;
  for (const auto& s : reference) {
    if (s.name.empty()) throw BuildError("reference sequence with empty name");
    if (!seen.insert(s.name).second) throw BuildError("duplicate sequence name: " + s.name);
    if (s.bases.empty()) throw BuildError("reference sequence '" + s.name + "' is empty");
    idx.meta_.sequences.push_back({s.name, s.bases.size(), total});
    total += s.bases.size();
  }
  if (total == 0) throw BuildError("empty reference");
  if (2 * total + 1 >= detail::kSaEmpty) throw BuildError("reference too long for 32-bit suffix array");

  std::mt19937_64 rng(params.ambiguity_seed);
  std::vector<BaseCode> forward;
  forward.reserve(total);
  for (const auto& s : reference) {
    for (char c : s.bases) {
      BaseCode b = encode_base(c);
      if (b > 3) {
        idx.meta_.replaced_positions.push_back(forward.size());
        b = static_cast<BaseCode>(rng() & 3u);
      }
      forward.push_back(b);
    }
  }

  const std::uint64_t n = 2 * total;
  const std::uint64_t rows = n + 1;
  std::vector<std::uint32_t> text(rows);
  for (std::uint64_t i = 0; i < total; ++i) {
    text[i] = forward[i] + 1u;
    text[n - 1 - i] = complement(forward[i]) + 1u;
  }
  text[n] = 0;
  const auto sa = build_suffix_array(text, 5);

  idx.rows_ = rows;
  idx.bwt_.assign((rows + ReferenceIndex::kOccInterval - 1) / ReferenceIndex::kOccInterval *
                      ReferenceIndex::kWordsPerBlock,
                  0);
  idx.occ_.assign((rows / ReferenceIndex::kOccInterval + 1) * 4, 0);
  std::array<std::uint64_t, 4> tally{};
  for (std::uint64_t r = 0; r < rows; ++r) {
    if (r % ReferenceIndex::kOccInterval == 0) {
      const auto block = r / ReferenceIndex::kOccInterval;
      for (int b = 0; b < 4; ++b) idx.occ_[block * 4 + b] = tally[b];
    }
    if (sa[r] == 0) {
      idx.primary_ = r;
      continue;
    }
    const auto sym = static_cast<BaseCode>(text[sa[r] - 1] - 1);
    idx.bwt_[r >> 5] |= static_cast<std::uint64_t>(sym) << ((r & 31) * 2);
    ++tally[sym];
  }
  if (rows % ReferenceIndex::kOccInterval == 0) {
    const auto block = rows / ReferenceIndex::kOccInterval;
    for (int b = 0; b < 4; ++b) idx.occ_[block * 4 + b] = tally[b];
  }
  idx.counts_[0] = 1;
  for (int b = 1; b < 5; ++b) idx.counts_[b] = idx.counts_[b - 1] + tally[b - 1];

  const std::uint64_t s = params.sa_sampling;
  idx.sa_samples_.resize((rows + s - 1) / s);
  for (std::uint64_t r = 0; r < rows; r += s) idx.sa_samples_[r / s] = sa[r];

  idx.ref_ = PackedBases(forward);
  idx.validate_shape();
  return idx;
}

inline ReferenceIndex build_index(const std::vector<NamedSequence>& reference, IndexParams params = {}) {
  return build_index(std::span<const NamedSequence>(reference), params);
}

}  // namespace mica

#endif  // MICA_REFERENCE_INDEX_HPP
