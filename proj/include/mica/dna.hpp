#ifndef MICA_DNA_HPP
#define MICA_DNA_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mica {

/// 2-bit nucleotide code. Anything outside ACGT encodes as kAmbiguous.
using BaseCode = std::uint8_t;

inline constexpr BaseCode kBaseA = 0;
inline constexpr BaseCode kBaseC = 1;
inline constexpr BaseCode kBaseG = 2;
inline constexpr BaseCode kBaseT = 3;
inline constexpr BaseCode kAmbiguous = 4;

enum class Strand : std::uint8_t { Forward = 0, Reverse = 1 };

namespace detail {
constexpr std::array<BaseCode, 256> make_encode_table() {
  std::array<BaseCode, 256> t{};
  for (auto& v : t) v = kAmbiguous;
  t['A'] = t['a'] = kBaseA;
  t['C'] = t['c'] = kBaseC;
  t['G'] = t['g'] = kBaseG;
  t['T'] = t['t'] = kBaseT;
  return t;
}
inline constexpr auto kEncodeTable = make_encode_table();
inline constexpr char kDecodeTable[5] = {'A', 'C', 'G', 'T', 'N'};
}  // namespace detail

constexpr BaseCode encode_base(char c) {
  return detail::kEncodeTable[static_cast<unsigned char>(c)];
}

constexpr char decode_base(BaseCode b) { return detail::kDecodeTable[b > 4 ? 4 : b]; }

constexpr BaseCode complement(BaseCode b) { return b < 4 ? static_cast<BaseCode>(3 - b) : b; }

inline bool is_acgt(char c) { return encode_base(c) != kAmbiguous; }

inline std::vector<BaseCode> encode(std::string_view s) {
  std::vector<BaseCode> out(s.size());
  std::transform(s.begin(), s.end(), out.begin(), encode_base);
  return out;
}

inline std::string decode(std::span<const BaseCode> codes) {
  std::string out(codes.size(), 'N');
  std::transform(codes.begin(), codes.end(), out.begin(), decode_base);
  return out;
}

inline std::vector<BaseCode> reverse_complement(std::span<const BaseCode> codes) {
  std::vector<BaseCode> out(codes.size());
  std::transform(codes.rbegin(), codes.rend(), out.begin(), complement);
  return out;
}

inline std::string reverse_complement(std::string_view s) {
  std::string out(s.size(), 'N');
  std::transform(s.rbegin(), s.rend(), out.begin(), [](char c) -> char {
    switch (c) {
      case 'A': return 'T';
      case 'C': return 'G';
      case 'G': return 'C';
      case 'T': return 'A';
      case 'a': return 't';
      case 'c': return 'g';
      case 'g': return 'c';
      case 't': return 'a';
      default: return c;
    }
  });
  return out;
}

/// Count of positions not in ACGT.
inline std::size_t count_ambiguous(std::span<const BaseCode> codes) {
  return static_cast<std::size_t>(
      std::count_if(codes.begin(), codes.end(), [](BaseCode b) { return b >= 4; }));
}

/// Dense 2-bit packed base array, 32 bases per 64-bit word, LSB first.
class PackedBases {
 public:
  PackedBases() = default;
  explicit PackedBases(std::span<const BaseCode> codes) : size_(codes.size()) {
    words_.assign((size_ + 31) / 32, 0);
    for (std::size_t i = 0; i < size_; ++i) {
      if (codes[i] > 3) throw std::invalid_argument("PackedBases: non-ACGT code");
      words_[i >> 5] |= static_cast<std::uint64_t>(codes[i]) << ((i & 31) * 2);
    }
  }
  PackedBases(std::vector<std::uint64_t> words, std::size_t size)
      : words_(std::move(words)), size_(size) {
    if (words_.size() != (size_ + 31) / 32) throw std::invalid_argument("PackedBases: size mismatch");
  }

  BaseCode operator[](std::size_t i) const {
    return static_cast<BaseCode>((words_[i >> 5] >> ((i & 31) * 2)) & 3u);
  }
  std::size_t size() const { return size_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  std::vector<BaseCode> slice(std::size_t begin, std::size_t end) const {
    std::vector<BaseCode> out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) out.push_back((*this)[i]);
    return out;
  }

  friend bool operator==(const PackedBases&, const PackedBases&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

}  // namespace mica

#endif  // MICA_DNA_HPP
