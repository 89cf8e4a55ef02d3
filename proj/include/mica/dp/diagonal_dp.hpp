#ifndef MICA_DP_DIAGONAL_DP_HPP
#define MICA_DP_DIAGONAL_DP_HPP

// Anti-diagonal DP over packed cells.
//
// Cell T[i,j] (i: window row, j: read column) lives on diagonal d = i + j,
// and diagonals are stored back to back, each ordered by increasing j. A run
// of consecutive cells on diagonal d depends on three runs that are also
// contiguous: left (i, j-1) and up (i-1, j) on d-1, upper-left (i-1, j-1) on
// d-2. The fill walks each diagonal `Lanes` cells at a time; the first and
// last runs of a diagonal may be partial or touch the table edge, and those
// lanes are masked to the -infinity cell.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mica/dp/alignment_result.hpp"
#include "mica/dp/cigar.hpp"
#include "mica/dp/packed_cell.hpp"
#include "mica/dp/scoring.hpp"

namespace mica {

/// Flat anti-diagonal-major table of packed cells, reusable across calls.
class DiagonalTable {
 public:
  void reset(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    const std::size_t diagonals = rows + cols - 1;
    offsets_.resize(diagonals + 1);
    std::size_t total = 0;
    for (std::size_t d = 0; d < diagonals; ++d) {
      offsets_[d] = total;
      total += first_col(d) <= last_col(d) ? last_col(d) - first_col(d) + 1 : 0;
    }
    offsets_[diagonals] = total;
    cells_.resize(total);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t diagonals() const { return rows_ + cols_ - 1; }
  std::size_t size() const { return cells_.size(); }

  std::size_t first_col(std::size_t d) const { return d + 1 > rows_ ? d + 1 - rows_ : 0; }
  std::size_t last_col(std::size_t d) const { return std::min(d, cols_ - 1); }
  std::size_t diagonal_offset(std::size_t d) const { return offsets_[d]; }

  std::size_t address(std::size_t i, std::size_t j) const {
    const std::size_t d = i + j;
    return offsets_[d] + (j - first_col(d));
  }

  PackedCell& at(std::size_t i, std::size_t j) { return cells_[address(i, j)]; }
  PackedCell at(std::size_t i, std::size_t j) const { return cells_[address(i, j)]; }

  PackedCell* data() { return cells_.data(); }
  const PackedCell* data() const { return cells_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<PackedCell> cells_;
};

namespace detail {

struct DiagonalBest {
  int score = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  bool found = false;

  void offer(int v, std::size_t ci, std::size_t cj) {
    if (v > score || (found && v == score && (ci < i || (ci == i && cj < j)))) {
      score = v;
      i = ci;
      j = cj;
      found = true;
    }
  }
};

inline std::int32_t gap_from(std::int32_t field, std::int32_t penalty) {
  return field == 0 ? 0 : std::clamp<std::int32_t>(field + penalty, 1, kCellFieldMax);
}

template <std::size_t Lanes>
void fill_diagonal(DiagonalTable& table, std::size_t d, std::span<const BaseCode> read,
                   std::span<const BaseCode> ref_staged, const ScoringScheme& sc, DiagonalBest& best) {
  const std::size_t jlo = table.first_col(d);
  const std::size_t jhi = table.last_col(d);
  PackedCell* out = table.data() + table.diagonal_offset(d);
  const PackedCell* prev1 = d >= 1 ? table.data() + table.diagonal_offset(d - 1) : nullptr;
  const PackedCell* prev2 = d >= 2 ? table.data() + table.diagonal_offset(d - 2) : nullptr;
  const std::size_t jlo1 = d >= 1 ? table.first_col(d - 1) : 0;
  const std::size_t jlo2 = d >= 2 ? table.first_col(d - 2) : 0;

  const auto bias = static_cast<std::int32_t>(kCellBias);
  const std::int32_t fmax = kCellFieldMax;
  const std::int32_t open = sc.gap_open_penalty;
  const std::int32_t ext = sc.gap_extend_penalty;

  for (std::size_t j0 = jlo; j0 <= jhi; j0 += Lanes) {
    const std::size_t count = std::min(Lanes, jhi - j0 + 1);
    std::array<PackedCell, Lanes> ul, up, lf;
    std::array<std::int32_t, Lanes> subst;
    for (std::size_t k = 0; k < Lanes; ++k) {
      const std::size_t j = j0 + k;
      const bool live = k < count;
      const bool has_left = live && j >= 1;
      const bool has_up = live && d >= j + 1;  // i >= 1
      lf[k] = has_left ? prev1[j - 1 - jlo1] : kNegInfCell;
      up[k] = has_up ? prev1[j - jlo1] : kNegInfCell;
      ul[k] = has_left && has_up ? prev2[j - 1 - jlo2] : kNegInfCell;
      const std::size_t kk = live ? j - jlo : 0;
      subst[k] = live ? sc.substitution(ref_staged[kk], read[j]) : 0;
    }

    std::array<PackedCell, Lanes> result;
    std::array<std::int32_t, Lanes> cell_max;
    for (std::size_t k = 0; k < Lanes; ++k) {
      const auto ulm = static_cast<std::int32_t>(ul[k] & kCellFieldMask);
      const auto uli = static_cast<std::int32_t>((ul[k] >> kCellShiftI) & kCellFieldMask);
      const auto uld = static_cast<std::int32_t>((ul[k] >> kCellShiftD) & kCellFieldMask);
      const std::int32_t restart = std::max(std::max(ulm, uli), std::max(uld, bias));
      const std::int32_t mval = std::clamp<std::int32_t>(restart + subst[k], 1, fmax);

      const auto lfm = static_cast<std::int32_t>(lf[k] & kCellFieldMask);
      const auto lfi = static_cast<std::int32_t>((lf[k] >> kCellShiftI) & kCellFieldMask);
      const std::int32_t ival = std::max(gap_from(lfm, open), gap_from(lfi, ext));

      const auto upm = static_cast<std::int32_t>(up[k] & kCellFieldMask);
      const auto upd = static_cast<std::int32_t>((up[k] >> kCellShiftD) & kCellFieldMask);
      const std::int32_t dval = std::max(gap_from(upm, open), gap_from(upd, ext));

      result[k] = static_cast<PackedCell>(mval) | (static_cast<PackedCell>(ival) << kCellShiftI) |
                  (static_cast<PackedCell>(dval) << kCellShiftD);
      cell_max[k] = std::max(mval, std::max(ival, dval)) - bias;
    }

    std::copy_n(result.begin(), count, out + (j0 - jlo));
    for (std::size_t k = 0; k < count; ++k)
      if (cell_max[k] > 0) best.offer(cell_max[k], d - (j0 + k), j0 + k);
  }
}

template <std::size_t Lanes>
DiagonalBest fill_table(DiagonalTable& table, std::span<const BaseCode> read, std::span<const BaseCode> window,
                        const ScoringScheme& scoring, std::vector<BaseCode>& staging) {
  DiagonalBest best;
  for (std::size_t d = 0; d < table.diagonals(); ++d) {
    const std::size_t jlo = table.first_col(d);
    const std::size_t jhi = table.last_col(d);
    // Window bases for this diagonal, reordered so lane k sees row d - (jlo + k).
    staging.resize(jhi - jlo + 1);
    for (std::size_t j = jlo; j <= jhi; ++j) staging[j - jlo] = window[d - j];
    fill_diagonal<Lanes>(table, d, read, staging, scoring, best);
  }
  return best;
}

inline AlignmentResult trace_diagonal(const DiagonalTable& table, const DiagonalBest& best,
                                      const ScoringScheme& scoring) {
  const std::size_t m = table.cols();
  AlignmentResult result;
  if (!best.found) {
    result.cigar.push('S', static_cast<std::uint32_t>(m));
    return result;
  }
  enum class Table { M, I, D };
  const CellScores top = unpack_cell(table.at(best.i, best.j));
  Table t = top.m == best.score ? Table::M : (top.i == best.score ? Table::I : Table::D);

  std::vector<char> ops;
  std::size_t i = best.i, j = best.j;
  for (;;) {
    if (t == Table::M) {
      ops.push_back('M');
      if (i == 0 || j == 0) break;
      const CellScores p = unpack_cell(table.at(i - 1, j - 1));
      const int prev = std::max({p.m, p.i, p.d});
      if (prev <= 0) break;
      t = p.m == prev ? Table::M : (p.i == prev ? Table::I : Table::D);
      --i;
      --j;
    } else if (t == Table::I) {
      ops.push_back('I');
      const int here = unpack_cell(table.at(i, j)).i;
      t = unpack_cell(table.at(i, j - 1)).m + scoring.gap_open_penalty == here ? Table::M : Table::I;
      --j;
    } else {
      ops.push_back('D');
      const int here = unpack_cell(table.at(i, j)).d;
      t = unpack_cell(table.at(i - 1, j)).m + scoring.gap_open_penalty == here ? Table::M : Table::D;
      --i;
    }
  }

  result.score = best.score;
  result.ref_start = i;
  result.ref_end = best.i + 1;
  result.cigar.push('S', static_cast<std::uint32_t>(j));
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) result.cigar.push(*it);
  result.cigar.push('S', static_cast<std::uint32_t>(m - 1 - best.j));
  result.aligned = best.score >= scoring.min_report_score;
  return result;
}

}  // namespace detail

/// Per-worker scratch for diagonal_affine_dp.
struct DiagonalWorkspace {
  DiagonalTable table;
  std::vector<BaseCode> staging;
};

inline bool supported_lane_count(std::size_t lanes) { return lanes == 1 || lanes == 4 || lanes == 8 || lanes == 16; }

/// Local affine-gap alignment filled in anti-diagonal order, `lanes` cells
/// per step. Produces exactly what scalar_affine_dp produces.
inline AlignmentResult diagonal_affine_dp(std::span<const BaseCode> read, std::span<const BaseCode> window,
                                          const ScoringScheme& scoring, std::size_t lanes,
                                          DiagonalWorkspace& workspace,
                                          std::size_t window_slack = kDefaultWindowSlack) {
  if (!supported_lane_count(lanes)) throw std::invalid_argument("diagonal_affine_dp: lanes must be 1, 4, 8 or 16");
  detail::check_dp_inputs(read.size(), window.size(), scoring, window_slack);
  workspace.table.reset(window.size(), read.size());
  detail::DiagonalBest best;
  switch (lanes) {
    case 1: best = detail::fill_table<1>(workspace.table, read, window, scoring, workspace.staging); break;
    case 4: best = detail::fill_table<4>(workspace.table, read, window, scoring, workspace.staging); break;
    case 8: best = detail::fill_table<8>(workspace.table, read, window, scoring, workspace.staging); break;
    default: best = detail::fill_table<16>(workspace.table, read, window, scoring, workspace.staging); break;
  }
  return detail::trace_diagonal(workspace.table, best, scoring);
}

inline AlignmentResult diagonal_affine_dp(std::span<const BaseCode> read, std::span<const BaseCode> window,
                                          const ScoringScheme& scoring, std::size_t lanes = 16,
                                          std::size_t window_slack = kDefaultWindowSlack) {
  DiagonalWorkspace workspace;
  return diagonal_affine_dp(read, window, scoring, lanes, workspace, window_slack);
}

}  // namespace mica

#endif  // MICA_DP_DIAGONAL_DP_HPP
