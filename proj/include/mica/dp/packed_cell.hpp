#ifndef MICA_DP_PACKED_CELL_HPP
#define MICA_DP_PACKED_CELL_HPP

// One DP cell in 32 bits: three 10-bit biased scores, M in bits 0-9,
// I in bits 10-19, D in bits 20-29. Bits 30-31 are reserved and zero.
// A field stores score + 512, saturated to [1, 1023]; field 0 is -infinity.

#include <algorithm>
#include <cstdint>

#include "mica/dp/scoring.hpp"

namespace mica {

using PackedCell = std::uint32_t;

inline constexpr std::uint32_t kCellBias = 512;
inline constexpr std::uint32_t kCellFieldMask = 0x3ff;
inline constexpr std::uint32_t kCellFieldMax = 1023;
inline constexpr unsigned kCellShiftM = 0;
inline constexpr unsigned kCellShiftI = 10;
inline constexpr unsigned kCellShiftD = 20;
inline constexpr PackedCell kNegInfCell = 0;

struct CellScores {
  int m;
  int i;
  int d;
  friend bool operator==(const CellScores&, const CellScores&) = default;
};

constexpr std::uint32_t encode_cell_field(int score) {
  if (score <= kNegInf) return 0;
  const long biased = static_cast<long>(score) + kCellBias;
  return static_cast<std::uint32_t>(std::clamp<long>(biased, 1, kCellFieldMax));
}

constexpr int decode_cell_field(std::uint32_t field) {
  return field == 0 ? kNegInf : static_cast<int>(field) - static_cast<int>(kCellBias);
}

constexpr PackedCell pack_cell(int m, int i, int d) {
  return (encode_cell_field(m) << kCellShiftM) | (encode_cell_field(i) << kCellShiftI) |
         (encode_cell_field(d) << kCellShiftD);
}

constexpr CellScores unpack_cell(PackedCell cell) {
  return {decode_cell_field((cell >> kCellShiftM) & kCellFieldMask),
          decode_cell_field((cell >> kCellShiftI) & kCellFieldMask),
          decode_cell_field((cell >> kCellShiftD) & kCellFieldMask)};
}

}  // namespace mica

#endif  // MICA_DP_PACKED_CELL_HPP
