#ifndef MICA_IO_READS_HPP
#define MICA_IO_READS_HPP

// FASTA / FASTQ input. Files may be gzip-compressed; zlib sniffs the magic
// bytes and reads plain files unchanged. FASTQ records are the usual four
// lines; FASTA records may fold sequence over any number of lines. CRLF
// line endings and a missing final newline are accepted.

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mica/reference_index.hpp"

namespace mica {

enum class MateSide : std::uint8_t { None, First, Second };

struct ReadRecord {
  std::string name;
  std::string bases;
  std::string qualities;  // empty when the input carried none
  std::uint64_t ordinal = 0;
  MateSide mate_side = MateSide::None;

  friend bool operator==(const ReadRecord&, const ReadRecord&) = default;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PairingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ReadFormat : std::uint8_t { Auto, Fasta, Fastq };
enum class ParseMode : std::uint8_t { Strict, Lenient };

/// Drop a trailing "/1" or "/2" mate suffix.
inline std::string strip_mate_suffix(std::string_view name) {
  if (name.size() > 2 && name[name.size() - 2] == '/' && (name.back() == '1' || name.back() == '2'))
    name.remove_suffix(2);
  return std::string(name);
}

namespace detail {

class LineSource {
 public:
  explicit LineSource(const std::filesystem::path& path) : path_(path.string()) {
    file_ = gzopen(path_.c_str(), "rb");
    if (file_ == nullptr) throw std::runtime_error("cannot open " + path_);
    gzbuffer(file_, 1 << 17);
  }
  ~LineSource() {
    if (file_ != nullptr) gzclose(file_);
  }
  LineSource(const LineSource&) = delete;
  LineSource& operator=(const LineSource&) = delete;

  /// Next line without its terminator; false at end of input.
  bool next(std::string& line) {
    if (pushed_back_) {
      line = std::move(held_);
      pushed_back_ = false;
      ++line_no_;
      return true;
    }
    line.clear();
    bool any = false;
    for (;;) {
      if (pos_ == len_) {
        if (!refill()) break;
      }
      any = true;
      const char* start = buf_.data() + pos_;
      const void* nl = std::memchr(start, '\n', len_ - pos_);
      if (nl != nullptr) {
        const auto n = static_cast<std::size_t>(static_cast<const char*>(nl) - start);
        line.append(start, n);
        pos_ += n + 1;
        break;
      }
      line.append(start, len_ - pos_);
      pos_ = len_;
    }
    if (!any) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_no_;
    return true;
  }

  void push_back(std::string line) {
    held_ = std::move(line);
    pushed_back_ = true;
    --line_no_;
  }

  std::uint64_t line_number() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  bool refill() {
    if (eof_) return false;
    const int n = gzread(file_, buf_.data(), static_cast<unsigned>(buf_.size()));
    if (n < 0) {
      int err = 0;
      const char* msg = gzerror(file_, &err);
      throw ParseError(path_ + ": read error: " + (msg != nullptr ? msg : "unknown"));
    }
    if (n == 0) {
      eof_ = true;
      return false;
    }
    len_ = static_cast<std::size_t>(n);
    pos_ = 0;
    return true;
  }

  std::string path_;
  gzFile file_ = nullptr;
  std::vector<char> buf_ = std::vector<char>(1 << 16);
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  bool eof_ = false;
  std::uint64_t line_no_ = 0;
  std::string held_;
  bool pushed_back_ = false;
};

inline std::string first_token(std::string_view header) {
  const auto end = header.find_first_of(" \t");
  return std::string(header.substr(0, end));
}

}  // namespace detail

/// Sequential reader over one FASTA or FASTQ file.
class ReadParser {
 public:
  explicit ReadParser(const std::filesystem::path& path, ReadFormat format = ReadFormat::Auto,
                      ParseMode mode = ParseMode::Strict)
      : src_(std::make_unique<detail::LineSource>(path)), format_(format), mode_(mode) {}

  /// Next record, or nullopt at end of input. Ordinals count records returned.
  std::optional<ReadRecord> next() {
    for (;;) {
      std::string header;
      do {
        if (!src_->next(header)) return std::nullopt;
      } while (header.empty());

      if (format_ == ReadFormat::Auto) {
        if (header[0] == '@') format_ = ReadFormat::Fastq;
        else if (header[0] == '>') format_ = ReadFormat::Fasta;
      }
      std::optional<ReadRecord> rec;
      try {
        rec = format_ == ReadFormat::Fasta ? parse_fasta(header) : parse_fastq(header);
      } catch (const ParseError&) {
        if (mode_ == ParseMode::Strict) throw;
        ++skipped_;
        continue;
      }
      rec->ordinal = ordinal_++;
      return rec;
    }
  }

  std::uint64_t skipped() const { return skipped_; }

 private:
  std::string location() const { return src_->path() + ":" + std::to_string(src_->line_number()); }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(location() + ": " + what); }

  // Report at the current line, then skip ahead to the next record start.
  [[noreturn]] void fail_and_resync(const std::string& what, char marker) {
    auto message = location() + ": " + what;
    resync(marker);
    throw ParseError(message);
  }

  ReadRecord parse_fastq(const std::string& header) {
    if (header[0] != '@') fail_and_resync("expected '@' at start of FASTQ record", '@');
    ReadRecord r;
    r.name = strip_mate_suffix(detail::first_token(std::string_view(header).substr(1)));
    std::string plus;
    if (!src_->next(r.bases)) fail("truncated FASTQ record (missing sequence)");
    if (!src_->next(plus)) fail("truncated FASTQ record (missing '+' line)");
    if (plus.empty() || plus[0] != '+') {
      const auto message = location() + ": expected '+' separator line";
      src_->push_back(std::move(plus));
      resync('@');
      throw ParseError(message);
    }
    if (!src_->next(r.qualities)) fail("truncated FASTQ record (missing quality line)");
    if (r.name.empty()) fail("empty read name");
    if (r.bases.empty()) fail("empty sequence");
    if (r.qualities.size() != r.bases.size()) fail("quality length does not match sequence length");
    normalise(r.bases);
    return r;
  }

  ReadRecord parse_fasta(const std::string& header) {
    if (header[0] != '>') fail_and_resync("expected '>' at start of FASTA record", '>');
    ReadRecord r;
    r.name = strip_mate_suffix(detail::first_token(std::string_view(header).substr(1)));
    std::string line;
    while (src_->next(line)) {
      if (!line.empty() && line[0] == '>') {
        src_->push_back(std::move(line));
        break;
      }
      r.bases += line;
    }
    if (r.name.empty()) fail("empty record name");
    if (r.bases.empty()) fail("empty sequence");
    normalise(r.bases);
    return r;
  }

  // Skip forward to the next line beginning with `marker`.
  void resync(char marker) {
    std::string line;
    while (src_->next(line)) {
      if (!line.empty() && line[0] == marker) {
        src_->push_back(std::move(line));
        return;
      }
    }
  }

  static void normalise(std::string& bases) {
    for (char& c : bases) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    std::erase_if(bases, [](char c) { return c == ' ' || c == '\t'; });
  }

  std::unique_ptr<detail::LineSource> src_;
  ReadFormat format_;
  ParseMode mode_;
  std::uint64_t ordinal_ = 0;
  std::uint64_t skipped_ = 0;
};

inline std::vector<ReadRecord> read_all(const std::filesystem::path& path, ReadFormat format = ReadFormat::Auto,
                                        ParseMode mode = ParseMode::Strict) {
  ReadParser p(path, format, mode);
  std::vector<ReadRecord> out;
  while (auto r = p.next()) out.push_back(std::move(*r));
  return out;
}

/// Load a FASTA reference as named sequences.
inline std::vector<NamedSequence> read_reference(const std::filesystem::path& path) {
  std::vector<NamedSequence> seqs;
  for (auto& r : read_all(path, ReadFormat::Fasta)) seqs.push_back({std::move(r.name), std::move(r.bases)});
  return seqs;
}

/// One read, or a mate pair, with its global input ordinal.
struct Fragment {
  std::uint64_t ordinal = 0;
  ReadRecord first;
  std::optional<ReadRecord> second;

  std::size_t read_count() const { return second ? 2 : 1; }
};

/// Anything that yields fragments in input order.
class FragmentSource {
 public:
  virtual ~FragmentSource() = default;
  virtual std::optional<Fragment> next() = 0;
  /// Malformed records dropped in lenient mode.
  virtual std::uint64_t skipped() const { return 0; }
};

/// In-memory fragments, mostly for tests and simulation.
class VectorFragmentSource : public FragmentSource {
 public:
  explicit VectorFragmentSource(std::vector<Fragment> fragments) : fragments_(std::move(fragments)) {}
  std::optional<Fragment> next() override {
    if (pos_ == fragments_.size()) return std::nullopt;
    return fragments_[pos_++];
  }

 private:
  std::vector<Fragment> fragments_;
  std::size_t pos_ = 0;
};

/// Single-end or paired input; paired files are consumed in lockstep.
class FragmentReader : public FragmentSource {
 public:
  explicit FragmentReader(std::vector<std::filesystem::path> paths, ParseMode mode = ParseMode::Strict) {
    if (paths.empty() || paths.size() > 2) throw std::invalid_argument("expected one or two read files");
    for (const auto& p : paths) parsers_.push_back(std::make_unique<ReadParser>(p, ReadFormat::Auto, mode));
  }

  bool paired() const { return parsers_.size() == 2; }

  std::optional<Fragment> next() override {
    auto a = parsers_[0]->next();
    if (!paired()) {
      if (!a) return std::nullopt;
      Fragment f{ordinal_++, std::move(*a), std::nullopt};
      f.first.ordinal = f.ordinal;
      return f;
    }
    auto b = parsers_[1]->next();
    if (!a && !b) return std::nullopt;
    if (!a || !b) throw PairingError("paired read files have different record counts");
    if (a->name != b->name) throw PairingError("mate names differ: '" + a->name + "' vs '" + b->name + "'");
    Fragment f{ordinal_++, std::move(*a), std::move(*b)};
    f.first.ordinal = f.second->ordinal = f.ordinal;
    f.first.mate_side = MateSide::First;
    f.second->mate_side = MateSide::Second;
    return f;
  }

  std::uint64_t skipped() const override {
    std::uint64_t n = 0;
    for (const auto& p : parsers_) n += p->skipped();
    return n;
  }

 private:
  std::vector<std::unique_ptr<ReadParser>> parsers_;
  std::uint64_t ordinal_ = 0;
};

}  // namespace mica

#endif  // MICA_IO_READS_HPP
