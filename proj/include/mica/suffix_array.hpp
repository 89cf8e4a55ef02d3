#ifndef MICA_SUFFIX_ARRAY_HPP
#define MICA_SUFFIX_ARRAY_HPP

// Suffix array construction by induced sorting (SA-IS), linear time.

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace mica {

namespace detail {

inline constexpr std::uint32_t kSaEmpty = std::numeric_limits<std::uint32_t>::max();

// text must end with a unique smallest symbol 0; every symbol < alphabet.
inline void sais(std::span<const std::uint32_t> text, std::span<std::uint32_t> sa,
                 std::uint32_t alphabet) {
  const std::size_t n = text.size();
  if (n == 1) {
    sa[0] = 0;
    return;
  }

  std::vector<bool> stype(n);
  stype[n - 1] = true;
  for (std::size_t i = n - 1; i-- > 0;)
    stype[i] = text[i] < text[i + 1] || (text[i] == text[i + 1] && stype[i + 1]);
  auto is_lms = [&](std::size_t i) { return i > 0 && stype[i] && !stype[i - 1]; };

  std::vector<std::uint32_t> counts(alphabet, 0);
  for (auto c : text) ++counts[c];
  std::vector<std::uint32_t> bucket(alphabet);
  auto bucket_heads = [&] {
    std::uint32_t sum = 0;
    for (std::uint32_t c = 0; c < alphabet; ++c) {
      bucket[c] = sum;
      sum += counts[c];
    }
  };
  auto bucket_tails = [&] {
    std::uint32_t sum = 0;
    for (std::uint32_t c = 0; c < alphabet; ++c) {
      sum += counts[c];
      bucket[c] = sum;
    }
  };
  auto induce = [&] {
    bucket_heads();
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t j = sa[i];
      if (j != kSaEmpty && j > 0 && !stype[j - 1]) sa[bucket[text[j - 1]]++] = j - 1;
    }
    bucket_tails();
    for (std::size_t i = n; i-- > 0;) {
      const std::uint32_t j = sa[i];
      if (j != kSaEmpty && j > 0 && stype[j - 1]) sa[--bucket[text[j - 1]]] = j - 1;
    }
  };

  // Stage 1: sort LMS substrings.
  std::fill(sa.begin(), sa.end(), kSaEmpty);
  bucket_tails();
  for (std::size_t i = 1; i < n; ++i)
    if (is_lms(i)) sa[--bucket[text[i]]] = static_cast<std::uint32_t>(i);
  induce();

  std::size_t lms_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (is_lms(sa[i])) sa[lms_count++] = sa[i];
  std::fill(sa.begin() + static_cast<std::ptrdiff_t>(lms_count), sa.end(), kSaEmpty);

  // Name LMS substrings; equal substrings share a name.
  std::uint32_t names = 0;
  std::uint32_t prev = kSaEmpty;
  for (std::size_t i = 0; i < lms_count; ++i) {
    const std::uint32_t pos = sa[i];
    bool differs = prev == kSaEmpty;
    for (std::size_t d = 0; !differs; ++d) {
      if (text[pos + d] != text[prev + d] || stype[pos + d] != stype[prev + d]) {
        differs = true;
      } else if (d > 0 && (is_lms(pos + d) || is_lms(prev + d))) {
        break;
      }
    }
    if (differs) {
      ++names;
      prev = pos;
    }
    sa[lms_count + pos / 2] = names - 1;
  }
  std::size_t j = n;
  for (std::size_t i = n; i-- > lms_count;)
    if (sa[i] != kSaEmpty) sa[--j] = sa[i];

  // Stage 2: sort the reduced problem.
  auto reduced = sa.subspan(n - lms_count, lms_count);
  auto reduced_sa = sa.subspan(0, lms_count);
  if (names < lms_count) {
    sais(std::span<const std::uint32_t>(reduced.data(), reduced.size()), reduced_sa, names);
  } else {
    for (std::size_t i = 0; i < lms_count; ++i) reduced_sa[reduced[i]] = static_cast<std::uint32_t>(i);
  }

  // Stage 3: induce the full order from sorted LMS suffixes.
  j = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (is_lms(i)) reduced[j++] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < lms_count; ++i) reduced_sa[i] = reduced[reduced_sa[i]];
  std::fill(sa.begin() + static_cast<std::ptrdiff_t>(lms_count), sa.end(), kSaEmpty);
  bucket_tails();
  for (std::size_t i = lms_count; i-- > 0;) {
    const std::uint32_t p = sa[i];
    sa[i] = kSaEmpty;
    sa[--bucket[text[p]]] = p;
  }
  induce();
}

}  // namespace detail

/// Suffix array of `text`. The last symbol must be 0 and occur nowhere else;
/// all symbols must be below `alphabet`.
inline std::vector<std::uint32_t> build_suffix_array(std::span<const std::uint32_t> text,
                                                     std::uint32_t alphabet) {
  if (text.empty()) throw std::invalid_argument("suffix array: empty text");
  if (text.size() >= detail::kSaEmpty) throw std::length_error("suffix array: text too long");
  if (text.back() != 0) throw std::invalid_argument("suffix array: missing terminal sentinel");
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == 0 || text[i] >= alphabet)
      throw std::invalid_argument("suffix array: symbol out of range");
  }
  std::vector<std::uint32_t> sa(text.size());
  detail::sais(text, sa, alphabet);
  return sa;
}

}  // namespace mica

#endif  // MICA_SUFFIX_ARRAY_HPP
