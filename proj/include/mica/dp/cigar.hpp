#ifndef MICA_DP_CIGAR_HPP
#define MICA_DP_CIGAR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mica/dna.hpp"
#include "mica/dp/scoring.hpp"

namespace mica {

struct CigarOp {
  char op = 'M';  // one of M I D S
  std::uint32_t length = 0;
  friend bool operator==(const CigarOp&, const CigarOp&) = default;
};

class Cigar {
 public:
  Cigar() = default;

  /// Append, merging with the last run when the operation repeats.
  void push(char op, std::uint32_t length = 1) {
    if (length == 0) return;
    if (!ops_.empty() && ops_.back().op == op) {
      ops_.back().length += length;
    } else {
      ops_.push_back({op, length});
    }
  }

  const std::vector<CigarOp>& ops() const { return ops_; }
  bool empty() const { return ops_.empty(); }

  std::uint64_t read_length() const { return sum_if("MIS"); }
  std::uint64_t reference_length() const { return sum_if("MD"); }
  std::uint32_t leading_clip() const { return !ops_.empty() && ops_.front().op == 'S' ? ops_.front().length : 0; }
  std::uint32_t trailing_clip() const { return ops_.size() > 1 && ops_.back().op == 'S' ? ops_.back().length : 0; }

  std::string to_string() const {
    if (ops_.empty()) return "*";
    std::string out;
    for (const auto& o : ops_) {
      out += std::to_string(o.length);
      out += o.op;
    }
    return out;
  }

  static std::optional<Cigar> parse(std::string_view text) {
    Cigar c;
    std::uint64_t n = 0;
    bool have_digits = false;
    for (char ch : text) {
      if (ch >= '0' && ch <= '9') {
        n = n * 10 + static_cast<std::uint64_t>(ch - '0');
        have_digits = true;
        if (n > 0xffffffffULL) return std::nullopt;
      } else if (ch == 'M' || ch == 'I' || ch == 'D' || ch == 'S') {
        if (!have_digits || n == 0) return std::nullopt;
        c.ops_.push_back({ch, static_cast<std::uint32_t>(n)});
        n = 0;
        have_digits = false;
      } else {
        return std::nullopt;
      }
    }
    if (have_digits || c.ops_.empty()) return std::nullopt;
    return c;
  }

  /// Structural checks: no adjacent repeats, clips only at the ends.
  bool well_formed() const {
    for (std::size_t k = 0; k < ops_.size(); ++k) {
      if (ops_[k].length == 0) return false;
      if (k > 0 && ops_[k].op == ops_[k - 1].op) return false;
      if (ops_[k].op == 'S' && k != 0 && k + 1 != ops_.size()) return false;
    }
    return true;
  }

  friend bool operator==(const Cigar&, const Cigar&) = default;

 private:
  std::uint64_t sum_if(std::string_view which) const {
    std::uint64_t n = 0;
    for (const auto& o : ops_)
      if (which.find(o.op) != std::string_view::npos) n += o.length;
    return n;
  }
  std::vector<CigarOp> ops_;
};

/// Score the alignment a CIGAR describes; `ref_start` is where the first
/// reference-consuming op lands in `window`.
inline int score_alignment(const Cigar& cigar, std::span<const BaseCode> read, std::span<const BaseCode> window,
                           std::uint64_t ref_start, const ScoringScheme& scoring) {
  int score = 0;
  std::uint64_t r = 0;
  std::uint64_t w = ref_start;
  for (const auto& o : cigar.ops()) {
    switch (o.op) {
      case 'S': r += o.length; break;
      case 'M':
        for (std::uint32_t k = 0; k < o.length; ++k) score += scoring.substitution(window[w++], read[r++]);
        break;
      case 'I':
        score += scoring.gap_open_penalty + static_cast<int>(o.length - 1) * scoring.gap_extend_penalty;
        r += o.length;
        break;
      case 'D':
        score += scoring.gap_open_penalty + static_cast<int>(o.length - 1) * scoring.gap_extend_penalty;
        w += o.length;
        break;
    }
  }
  return score;
}

/// Mismatched plus inserted plus deleted bases (the SAM NM value).
inline std::uint32_t edit_distance(const Cigar& cigar, std::span<const BaseCode> read,
                                   std::span<const BaseCode> window, std::uint64_t ref_start) {
  std::uint32_t nm = 0;
  std::uint64_t r = 0;
  std::uint64_t w = ref_start;
  for (const auto& o : cigar.ops()) {
    switch (o.op) {
      case 'S': r += o.length; break;
      case 'M':
        for (std::uint32_t k = 0; k < o.length; ++k, ++r, ++w)
          if (read[r] != window[w] || read[r] > 3) ++nm;
        break;
      case 'I': nm += o.length; r += o.length; break;
      case 'D': nm += o.length; w += o.length; break;
    }
  }
  return nm;
}

}  // namespace mica

#endif  // MICA_DP_CIGAR_HPP
