#ifndef MICA_DP_SCALAR_DP_HPP
#define MICA_DP_SCALAR_DP_HPP

// Row-major full-matrix Smith-Waterman with affine gaps on plain ints.
// This is the reference the diagonal kernel is checked against.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "mica/dp/alignment_result.hpp"
#include "mica/dp/cigar.hpp"
#include "mica/dp/scoring.hpp"

namespace mica {

inline AlignmentResult scalar_affine_dp(std::span<const BaseCode> read, std::span<const BaseCode> window,
                                        const ScoringScheme& scoring,
                                        std::size_t window_slack = kDefaultWindowSlack) {
  detail::check_dp_inputs(read.size(), window.size(), scoring, window_slack);
  const std::size_t n = window.size();  // rows: reference
  const std::size_t m = read.size();    // columns: read
  std::vector<int> M(n * m), I(n * m), D(n * m);
  auto at = [m](std::size_t i, std::size_t j) { return i * m + j; };

  int best = 0;
  std::size_t best_i = 0, best_j = 0;
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      int diag = kNegInf;
      if (i > 0 && j > 0) diag = std::max({M[at(i - 1, j - 1)], I[at(i - 1, j - 1)], D[at(i - 1, j - 1)]});
      M[at(i, j)] = std::max(0, diag) + scoring.substitution(window[i], read[j]);
      I[at(i, j)] = j > 0 ? std::max(M[at(i, j - 1)] + scoring.gap_open_penalty,
                                     I[at(i, j - 1)] + scoring.gap_extend_penalty)
                          : kNegInf;
      D[at(i, j)] = i > 0 ? std::max(M[at(i - 1, j)] + scoring.gap_open_penalty,
                                     D[at(i - 1, j)] + scoring.gap_extend_penalty)
                          : kNegInf;
      I[at(i, j)] = std::max(I[at(i, j)], kNegInf);
      D[at(i, j)] = std::max(D[at(i, j)], kNegInf);
      const int cell_best = std::max({M[at(i, j)], I[at(i, j)], D[at(i, j)]});
      if (cell_best > best) {
        best = cell_best;
        best_i = i;
        best_j = j;
        found = true;
      }
    }
  }

  AlignmentResult result;
  if (!found) {
    result.cigar.push('S', static_cast<std::uint32_t>(m));
    return result;
  }

  enum class Table { M, I, D };
  Table table = Table::M;
  if (M[at(best_i, best_j)] != best) table = I[at(best_i, best_j)] == best ? Table::I : Table::D;

  std::vector<char> ops;
  std::size_t i = best_i, j = best_j;
  for (;;) {
    if (table == Table::M) {
      ops.push_back('M');
      if (i == 0 || j == 0) break;
      const std::size_t p = at(i - 1, j - 1);
      const int prev = std::max({M[p], I[p], D[p]});
      if (prev <= 0) break;
      table = M[p] == prev ? Table::M : (I[p] == prev ? Table::I : Table::D);
      --i;
      --j;
    } else if (table == Table::I) {
      ops.push_back('I');
      table = M[at(i, j - 1)] + scoring.gap_open_penalty == I[at(i, j)] ? Table::M : Table::I;
      --j;
    } else {
      ops.push_back('D');
      table = M[at(i - 1, j)] + scoring.gap_open_penalty == D[at(i, j)] ? Table::M : Table::D;
      --i;
    }
  }

  result.score = best;
  result.ref_start = i;
  result.ref_end = best_i + 1;
  result.cigar.push('S', static_cast<std::uint32_t>(j));
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) result.cigar.push(*it);
  result.cigar.push('S', static_cast<std::uint32_t>(m - 1 - best_j));
  result.aligned = best >= scoring.min_report_score;
  return result;
}

}  // namespace mica

#endif  // MICA_DP_SCALAR_DP_HPP
