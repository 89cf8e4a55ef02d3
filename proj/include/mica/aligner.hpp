#ifndef MICA_ALIGNER_HPP
#define MICA_ALIGNER_HPP

// Two-phase alignment of a single read: BWT mismatch search for candidate
// loci, then affine-gap DP over a reference window around each locus.
// Reads without a full-length few-mismatch hit are seeded by short pieces
// instead, so DP can still recover placements with indels.

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "mica/dna.hpp"
#include "mica/dp/cigar.hpp"
#include "mica/dp/diagonal_dp.hpp"
#include "mica/reference_index.hpp"
#include "mica/seed_search.hpp"

namespace mica {

struct ReferenceWindow {
  std::vector<BaseCode> bases;
  std::uint64_t origin = 0;  // sequence coordinate of bases[0]
};

/// Reference bases over [offset - margin, offset + read_length + margin),
/// clipped to the hit's sequence.
inline ReferenceWindow extract_window(const ReferenceIndex& index, const SeedHit& hit, std::uint64_t read_length,
                                      std::uint64_t margin) {
  const auto& seq = index.sequences().at(hit.seq_id);
  const std::uint64_t begin = hit.offset > margin ? hit.offset - margin : 0;
  const std::uint64_t end = std::min(seq.length, hit.offset + read_length + margin);
  return {index.sequence_slice(hit.seq_id, begin, std::max(begin, end)), begin};
}

/// One scored placement of a read on the reference.
struct Placement {
  std::uint32_t seq_id = 0;
  std::uint64_t pos = 0;  // 0-based leftmost aligned reference base
  Strand strand = Strand::Forward;
  int score = 0;
  Cigar cigar;
  std::uint32_t edit_distance = 0;

  std::uint64_t end() const { return pos + cigar.reference_length(); }
  friend bool operator==(const Placement&, const Placement&) = default;
};

/// Best first: score descending, then lowest (sequence, position, forward first).
inline bool placement_order(const Placement& a, const Placement& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.seq_id != b.seq_id) return a.seq_id < b.seq_id;
  if (a.pos != b.pos) return a.pos < b.pos;
  return a.strand < b.strand;
}

struct AlignerConfig {
  SearchBudget budget;
  ScoringScheme scoring;
  std::size_t lanes = 16;
  std::uint64_t window_margin = 16;
  std::size_t min_seed_length = kDefaultMinSeedLength;
  std::size_t piece_length = 20;
  double max_ambiguous_fraction = 0.10;
};

enum class ReadStatus : std::uint8_t { Aligned, Unmapped, Deferred };

struct ReadAlignment {
  ReadStatus status = ReadStatus::Unmapped;
  std::vector<Placement> candidates;  // sorted by placement_order
  std::uint64_t states = 0;
};

/// The controller-side budget for deferred reads.
inline SearchBudget fallback_budget(const SearchBudget& worker) {
  SearchBudget b = worker;
  b.max_states = SearchBudget::kUnlimited;
  b.max_hits = 1024;
  b.overflow = HitOverflow::Truncate;
  return b;
}

namespace detail {

// Candidate read start implied by a hit on a piece read[piece_start, piece_start + len).
inline SeedHit piece_to_read_hit(const ReferenceIndex& index, const SeedHit& piece, std::uint64_t piece_start,
                                 std::uint64_t piece_len, std::uint64_t read_len) {
  SeedHit h = piece;
  const std::uint64_t lead = piece.strand == Strand::Forward ? piece_start : read_len - piece_start - piece_len;
  h.offset = piece.offset > lead ? piece.offset - lead : 0;
  const auto& seq = index.sequences()[h.seq_id];
  if (h.offset >= seq.length) h.offset = seq.length - 1;
  return h;
}

}  // namespace detail

/// Align one read. Returns Deferred when any search crossed the budget.
inline ReadAlignment align_read(const ReferenceIndex& index, std::span<const BaseCode> read,
                                const AlignerConfig& config, const SearchBudget& budget,
                                DiagonalWorkspace& workspace) {
  ReadAlignment out;
  const std::size_t m = read.size();
  if (m < config.min_seed_length || m > static_cast<std::size_t>(kMaxCellScore)) return out;

  std::vector<SeedHit> loci;
  const bool search_whole = static_cast<double>(count_ambiguous(read)) <=
                            config.max_ambiguous_fraction * static_cast<double>(m);
  if (search_whole) {
    auto whole = mismatch_search(index, read, budget, config.min_seed_length);
    out.states += whole.states;
    if (whole.exceeded()) {
      out.status = ReadStatus::Deferred;
      return out;
    }
    loci = std::move(whole.hits);
  }

  if (loci.empty()) {
    const std::size_t plen = std::max(config.piece_length, config.min_seed_length);
    SearchBudget piece_budget = budget;
    piece_budget.max_mismatches = std::min<std::uint32_t>(budget.max_mismatches, 1);
    for (std::size_t start = 0; start + plen <= m; start += plen) {
      auto piece = mismatch_search(index, read.subspan(start, plen), piece_budget, config.min_seed_length);
      out.states += piece.states;
      if (piece.exceeded()) {
        out.status = ReadStatus::Deferred;
        out.candidates.clear();
        return out;
      }
      for (const auto& h : piece.hits) loci.push_back(detail::piece_to_read_hit(index, h, start, plen, m));
    }
    std::sort(loci.begin(), loci.end(), [](const SeedHit& a, const SeedHit& b) {
      if (a.seq_id != b.seq_id) return a.seq_id < b.seq_id;
      if (a.strand != b.strand) return a.strand < b.strand;
      return a.offset < b.offset;
    });
    loci.erase(std::unique(loci.begin(), loci.end(),
                           [](const SeedHit& a, const SeedHit& b) {
                             return a.seq_id == b.seq_id && a.strand == b.strand && a.offset == b.offset;
                           }),
               loci.end());
  }

  const std::vector<BaseCode> rc = reverse_complement(read);
  const std::size_t slack = std::max<std::size_t>(kDefaultWindowSlack, 2 * config.window_margin);
  for (const auto& hit : loci) {
    const auto window = extract_window(index, hit, m, config.window_margin);
    if (window.bases.empty()) continue;
    const std::span<const BaseCode> oriented = hit.strand == Strand::Forward ? read : std::span<const BaseCode>(rc);
    const auto r = diagonal_affine_dp(oriented, window.bases, config.scoring, config.lanes, workspace, slack);
    if (!r.aligned) continue;
    Placement p;
    p.seq_id = hit.seq_id;
    p.pos = window.origin + r.ref_start;
    p.strand = hit.strand;
    p.score = r.score;
    p.cigar = r.cigar;
    p.edit_distance = edit_distance(r.cigar, oriented, window.bases, r.ref_start);
    out.candidates.push_back(std::move(p));
  }

  std::stable_sort(out.candidates.begin(), out.candidates.end(), placement_order);
  // Overlapping windows can land on the same placement; keep the first (best).
  std::vector<Placement> unique;
  for (auto& c : out.candidates) {
    const bool dup = std::any_of(unique.begin(), unique.end(), [&](const Placement& u) {
      return u.seq_id == c.seq_id && u.pos == c.pos && u.strand == c.strand;
    });
    if (!dup) unique.push_back(std::move(c));
  }
  out.candidates = std::move(unique);
  out.status = out.candidates.empty() ? ReadStatus::Unmapped : ReadStatus::Aligned;
  return out;
}

inline ReadAlignment align_read(const ReferenceIndex& index, std::span<const BaseCode> read,
                                const AlignerConfig& config, DiagonalWorkspace& workspace) {
  return align_read(index, read, config, config.budget, workspace);
}

/// Controller path for a deferred read: unlimited states, hits capped at 1024.
inline ReadAlignment fallback_align(const ReferenceIndex& index, std::span<const BaseCode> read,
                                    const AlignerConfig& config, DiagonalWorkspace& workspace) {
  return align_read(index, read, config, fallback_budget(config.budget), workspace);
}

}  // namespace mica

#endif  // MICA_ALIGNER_HPP
