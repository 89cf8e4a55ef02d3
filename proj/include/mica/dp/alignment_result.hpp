#ifndef MICA_DP_ALIGNMENT_RESULT_HPP
#define MICA_DP_ALIGNMENT_RESULT_HPP

#include <cstdint>
#include <ostream>

#include "mica/dp/cigar.hpp"

namespace mica {

/// Local alignment of a read against a window. Coordinates are
/// window-relative, half-open. When nothing scores above zero the result is
/// the empty alignment: score 0, an all-soft-clip CIGAR, empty span.
struct AlignmentResult {
  int score = 0;
  std::uint64_t ref_start = 0;
  std::uint64_t ref_end = 0;
  Cigar cigar;
  bool aligned = false;

  friend bool operator==(const AlignmentResult&, const AlignmentResult&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const AlignmentResult& r) {
  return os << "{score=" << r.score << " span=[" << r.ref_start << "," << r.ref_end << ") cigar=" << r.cigar.to_string()
            << " aligned=" << r.aligned << "}";
}

}  // namespace mica

#endif  // MICA_DP_ALIGNMENT_RESULT_HPP
