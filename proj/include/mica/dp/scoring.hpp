#ifndef MICA_DP_SCORING_HPP
#define MICA_DP_SCORING_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "mica/dna.hpp"

namespace mica {

/// Affine gap scoring. A gap of length L costs gap_open + (L - 1) * gap_extend.
struct ScoringScheme {
  int match_bonus = 1;
  int mismatch_penalty = -4;
  int gap_open_penalty = -6;
  int gap_extend_penalty = -1;
  int min_report_score = 20;

  void validate() const {
    if (match_bonus <= 0) throw std::invalid_argument("scoring: match bonus must be positive");
    if (mismatch_penalty >= 0 || gap_open_penalty >= 0 || gap_extend_penalty >= 0)
      throw std::invalid_argument("scoring: penalties must be negative");
    if (gap_open_penalty > gap_extend_penalty)
      throw std::invalid_argument("scoring: gap open must cost at least as much as gap extend");
  }

  int substitution(BaseCode ref, BaseCode read) const {
    return (ref == read && ref <= 3) ? match_bonus : mismatch_penalty;
  }

  friend bool operator==(const ScoringScheme&, const ScoringScheme&) = default;
};

/// Unbounded negative score; the packed representation stores it as field 0.
inline constexpr int kNegInf = std::numeric_limits<int>::min() / 4;

/// Largest score representable in a packed cell field.
inline constexpr int kMaxCellScore = 511;

/// Default allowance for how much longer than 2 * read length a window may be.
inline constexpr std::size_t kDefaultWindowSlack = 256;

namespace detail {
inline void check_dp_inputs(std::size_t read_len, std::size_t window_len, const ScoringScheme& scoring,
                            std::size_t window_slack) {
  scoring.validate();
  if (read_len == 0 || read_len > static_cast<std::size_t>(kMaxCellScore))
    throw std::invalid_argument("dp: read length must be in [1, 511]");
  if (read_len * static_cast<std::size_t>(scoring.match_bonus) > static_cast<std::size_t>(kMaxCellScore))
    throw std::invalid_argument("dp: read length * match bonus exceeds packed score range");
  if (window_len == 0 || window_len > 2 * read_len + window_slack)
    throw std::invalid_argument("dp: window length " + std::to_string(window_len) + " outside [1, 2 * " +
                                std::to_string(read_len) + " + " + std::to_string(window_slack) + "]");
}
}  // namespace detail

}  // namespace mica

#endif  // MICA_DP_SCORING_HPP
