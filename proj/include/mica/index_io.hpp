#ifndef MICA_INDEX_IO_HPP
#define MICA_INDEX_IO_HPP

// Index file layout (little-endian):
//
//   "MICL" u32 version u64 file_length
//   u32 sa_sampling u32 occ_interval u64 ambiguity_seed
//   u64 rows u64 primary u64 counts[5]
//   section bwt        : u64 count, u64 words[count]
//   section occ        : u64 count, u64 values[count]
//   section sa_samples : u64 count, u32 values[count]
//   section ref_bases  : u64 base_count, u64 word_count, u64 words[word_count]
//   section meta       : u64 nseq, { u64 name_len, bytes, u64 length, u64 offset }*,
//                        u64 nreplaced, u64 positions[nreplaced]
//   u64 checksum (FNV-1a 64 over every preceding byte)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mica/reference_index.hpp"

namespace mica {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

inline constexpr std::array<char, 4> kIndexMagic = {'M', 'I', 'C', 'L'};
inline constexpr std::uint32_t kIndexVersion = 1;

class IndexLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IndexTruncatedError : public IndexLoadError {
 public:
  using IndexLoadError::IndexLoadError;
};
class IndexVersionError : public IndexLoadError {
 public:
  using IndexLoadError::IndexLoadError;
};
class IndexChecksumError : public IndexLoadError {
 public:
  using IndexLoadError::IndexLoadError;
};
class IndexFormatError : public IndexLoadError {
 public:
  using IndexLoadError::IndexLoadError;
};

inline std::uint64_t fnv1a64(std::span<const char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  template <class T>
  void put_array(const std::vector<T>& v) {
    put<std::uint64_t>(v.size());
    const auto* p = reinterpret_cast<const char*>(v.data());
    buf_.insert(buf_.end(), p, p + v.size() * sizeof(T));
  }
  void put_bytes(std::string_view s) {
    put<std::uint64_t>(s.size());
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<char>& buffer() { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const char> bytes) : bytes_(bytes) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <class T>
  std::vector<T> get_array() {
    const auto n = get<std::uint64_t>();
    if (n > (bytes_.size() - pos_) / sizeof(T)) throw IndexTruncatedError("index file truncated: array section");
    std::vector<T> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  std::string get_bytes() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::uint64_t n) const {
    if (n > bytes_.size() - pos_) throw IndexTruncatedError("index file truncated");
  }
  std::span<const char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> serialize_index(const ReferenceIndex& index) {
  detail::ByteWriter w;
  for (char c : kIndexMagic) w.put(c);
  w.put<std::uint32_t>(kIndexVersion);
  w.put<std::uint64_t>(0);  // file length, patched below
  const auto& meta = index.meta();
  w.put<std::uint32_t>(meta.params.sa_sampling);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ReferenceIndex::kOccInterval));
  w.put<std::uint64_t>(meta.params.ambiguity_seed);
  w.put<std::uint64_t>(index.rows());
  w.put<std::uint64_t>(index.primary_row());
  for (auto c : index.counts()) w.put<std::uint64_t>(c);
  w.put_array(index.bwt_words());
  w.put_array(index.occ_checkpoints());
  w.put_array(index.sa_samples());
  w.put<std::uint64_t>(index.reference().size());
  w.put_array(index.reference().words());
  w.put<std::uint64_t>(meta.sequences.size());
  for (const auto& s : meta.sequences) {
    w.put_bytes(s.name);
    w.put<std::uint64_t>(s.length);
    w.put<std::uint64_t>(s.offset);
  }
  w.put_array(meta.replaced_positions);

  auto& buf = w.buffer();
  const std::uint64_t total = buf.size() + sizeof(std::uint64_t);
  std::memcpy(buf.data() + 8, &total, sizeof total);
  const std::uint64_t sum = fnv1a64(buf);
  w.put(sum);
  return std::move(buf);
}

inline ReferenceIndex deserialize_index(std::span<const char> bytes) {
  constexpr std::size_t kFixedHeader = 16;
  if (bytes.size() < kFixedHeader) throw IndexTruncatedError("index file truncated: missing header");
  if (!std::equal(kIndexMagic.begin(), kIndexMagic.end(), bytes.begin()))
    throw IndexFormatError("not a mica index (bad magic)");
  detail::ByteReader header(bytes.subspan(4, 12));
  const auto version = header.get<std::uint32_t>();
  if (version != kIndexVersion)
    throw IndexVersionError("index format version " + std::to_string(version) + " unsupported (expected " +
                            std::to_string(kIndexVersion) + ")");
  const auto declared = header.get<std::uint64_t>();
  if (bytes.size() < declared) throw IndexTruncatedError("index file truncated");
  if (bytes.size() != declared || declared < kFixedHeader + 8) throw IndexFormatError("index file length mismatch");
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (fnv1a64(bytes.first(bytes.size() - 8)) != stored) throw IndexChecksumError("index checksum mismatch");

  detail::ByteReader r(bytes.subspan(kFixedHeader, bytes.size() - kFixedHeader - 8));
  ReferenceIndex::Parts p;
  p.meta.params.sa_sampling = r.get<std::uint32_t>();
  if (r.get<std::uint32_t>() != ReferenceIndex::kOccInterval) throw IndexFormatError("unsupported occ interval");
  p.meta.params.ambiguity_seed = r.get<std::uint64_t>();
  p.rows = r.get<std::uint64_t>();
  p.primary = r.get<std::uint64_t>();
  for (auto& c : p.counts) c = r.get<std::uint64_t>();
  p.bwt = r.get_array<std::uint64_t>();
  p.occ = r.get_array<std::uint64_t>();
  p.sa_samples = r.get_array<std::uint32_t>();
  const auto nbases = r.get<std::uint64_t>();
  auto ref_words = r.get_array<std::uint64_t>();
  const auto nseq = r.get<std::uint64_t>();
  std::uint64_t expected_offset = 0;
  for (std::uint64_t i = 0; i < nseq; ++i) {
    SequenceInfo s;
    s.name = r.get_bytes();
    s.length = r.get<std::uint64_t>();
    s.offset = r.get<std::uint64_t>();
    if (s.offset != expected_offset) throw IndexFormatError("sequence table inconsistent");
    expected_offset += s.length;
    p.meta.sequences.push_back(std::move(s));
  }
  if (nseq == 0 || expected_offset != nbases) throw IndexFormatError("sequence table inconsistent");
  p.meta.replaced_positions = r.get_array<std::uint64_t>();
  try {
    p.ref = PackedBases(std::move(ref_words), nbases);
    for (auto v : p.sa_samples)
      if (v >= p.rows) throw std::invalid_argument("sampled suffix out of range");
    return ReferenceIndex::from_parts(std::move(p));
  } catch (const std::invalid_argument& e) {
    throw IndexFormatError(std::string("malformed index: ") + e.what());
  }
}

inline void save_index(const ReferenceIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open index for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing index: " + path.string());
}

inline ReferenceIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexLoadError("cannot open index: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace mica

#endif  // MICA_INDEX_IO_HPP
