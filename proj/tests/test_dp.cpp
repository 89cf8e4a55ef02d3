#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "mica/aligner.hpp"
#include "mica/dp/diagonal_dp.hpp"
#include "mica/dp/packed_cell.hpp"
#include "mica/dp/scalar_dp.hpp"
#include "mica/reference_index.hpp"
#include "support/oracles.hpp"

using namespace mica;
using mica::support::random_dna;

namespace {

constexpr std::size_t kLaneCounts[] = {1, 4, 8, 16};

AlignmentResult scalar(const std::string& read, const std::string& window, const ScoringScheme& s = {}) {
  return scalar_affine_dp(encode(read), encode(window), s);
}

AlignmentResult diagonal(const std::string& read, const std::string& window, std::size_t lanes,
                         const ScoringScheme& s = {}) {
  return diagonal_affine_dp(encode(read), encode(window), s, lanes);
}

std::uint32_t field(PackedCell c, unsigned shift) { return (c >> shift) & kCellFieldMask; }

void expect_conserved(const AlignmentResult& r, std::size_t read_len) {
  EXPECT_EQ(r.cigar.read_length(), read_len) << r;
  EXPECT_EQ(r.cigar.reference_length(), r.ref_end - r.ref_start) << r;
  EXPECT_TRUE(r.cigar.well_formed()) << r;
}

}  // namespace

TEST(PackedCell, ZeroScoresSitAtTheBias) {
  const PackedCell c = pack_cell(0, 0, 0);
  EXPECT_EQ(field(c, kCellShiftM), 512u);
  EXPECT_EQ(field(c, kCellShiftI), 512u);
  EXPECT_EQ(field(c, kCellShiftD), 512u);
  EXPECT_EQ(c >> 30, 0u);
}

TEST(PackedCell, NegativeInfinityIsAllZeroFields) {
  EXPECT_EQ(pack_cell(kNegInf, kNegInf, kNegInf), 0u);
  EXPECT_EQ(unpack_cell(0), (CellScores{kNegInf, kNegInf, kNegInf}));
}

TEST(PackedCell, OutOfRangeScoresSaturate) {
  const PackedCell c = pack_cell(600, -600, 5);
  EXPECT_EQ(field(c, kCellShiftM), 1023u);
  EXPECT_EQ(field(c, kCellShiftI), 1u);
  EXPECT_EQ(field(c, kCellShiftD), 517u);
  EXPECT_EQ(unpack_cell(c), (CellScores{511, -511, 5}));
}

TEST(PackedCell, RoundTripOverBoundariesAndRandomSample) {
  const int edges[] = {-511, -510, -1, 0, 1, 510, 511};
  for (int m : edges)
    for (int i : edges)
      for (int d : edges) ASSERT_EQ(unpack_cell(pack_cell(m, i, d)), (CellScores{m, i, d}));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> score(-511, 511);
  for (int n = 0; n < 200'000; ++n) {
    const int m = score(rng), i = score(rng), d = score(rng);
    const PackedCell c = pack_cell(m, i, d);
    ASSERT_EQ(unpack_cell(c), (CellScores{m, i, d}));
    ASSERT_EQ(c >> 30, 0u);
  }
}

TEST(PackedCell, SaturationIsMonotone) {
  int prev = decode_cell_field(encode_cell_field(-5000));
  for (int s = -5000; s <= 5000; ++s) {
    const int v = decode_cell_field(encode_cell_field(s));
    ASSERT_GE(v, prev);
    prev = v;
  }
}

TEST(DiagonalTable, AddressIsABijection) {
  DiagonalTable t;
  for (std::size_t n : {1u, 2u, 5u, 17u}) {
    for (std::size_t m : {1u, 3u, 5u, 20u}) {
      t.reset(n, m);
      ASSERT_EQ(t.size(), n * m);
      std::vector<int> seen(n * m, 0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) ++seen.at(t.address(i, j));
      for (int s : seen) ASSERT_EQ(s, 1);
    }
  }
}

TEST(DiagonalTable, NeighboursSitAtFixedOffsetsInPrecedingDiagonals) {
  DiagonalTable t;
  t.reset(9, 7);
  for (std::size_t i = 1; i < 9; ++i) {
    for (std::size_t j = 1; j < 7; ++j) {
      const std::size_t d = i + j;
      // Position within each diagonal is j minus the diagonal's first column.
      EXPECT_EQ(t.address(i, j - 1) - t.diagonal_offset(d - 1), j - 1 - t.first_col(d - 1));
      EXPECT_EQ(t.address(i - 1, j) - t.diagonal_offset(d - 1), j - t.first_col(d - 1));
      EXPECT_EQ(t.address(i - 1, j - 1) - t.diagonal_offset(d - 2), j - 1 - t.first_col(d - 2));
    }
  }
}

TEST(ScalarDp, IdentityAlignment) {
  const auto r = scalar("ACGTACGTAC", "ACGTACGTAC", ScoringScheme{1, -4, -6, -1, 1});
  EXPECT_EQ(r.score, 10);
  EXPECT_EQ(r.cigar.to_string(), "10M");
  EXPECT_EQ(r.ref_start, 0u);
  EXPECT_EQ(r.ref_end, 10u);
  EXPECT_TRUE(r.aligned);
}

// The read sits on the window either side of the extra G with a single
// mismatch (19 matches - 4 = 15), which beats 20 matches plus a one-base
// gap (20 - 6 = 14). Both mismatch placements score 15; the smaller end
// cell wins.
TEST(ScalarDp, SingleBaseGapFixtureMatchesGapEnumeration) {
  const std::string read = "AAAAAAAAAATTTTTTTTTT";
  const std::string window = "AAAAAAAAAAGTTTTTTTTTT";
  ASSERT_EQ(support::local_score_by_gap_enumeration(read, window, 1, -4, -6, -1), 15);
  const auto r = scalar(read, window);
  EXPECT_EQ(r.score, 15);
  EXPECT_EQ(r.cigar.to_string(), "20M");
  EXPECT_EQ(r.ref_start, 0u);
  EXPECT_EQ(r.ref_end, 20u);
  EXPECT_FALSE(r.aligned);  // below the default reporting threshold of 20
}

TEST(ScalarDp, DeletionWhenShiftingCostsMoreThanTheGap) {
  const std::string flank_a = "ACGTTGCAAGCTTACGGATC";
  const std::string flank_b = "TTAGCCGATAGCATGCACTG";
  const auto r = scalar(flank_a + flank_b, flank_a + "G" + flank_b);
  EXPECT_EQ(r.score, 40 - 6);
  EXPECT_EQ(r.cigar.to_string(), "20M1D20M");
  EXPECT_EQ(r.ref_end - r.ref_start, 41u);
}

TEST(ScalarDp, NoPositiveCellIsUnaligned) {
  const auto r = scalar("TTTT", "AAAA", ScoringScheme{1, -4, -6, -1, 1});
  EXPECT_FALSE(r.aligned);
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.cigar.to_string(), "4S");
  EXPECT_EQ(r.ref_start, r.ref_end);
}

TEST(ScalarDp, SoftClipsUnalignedEnds) {
  const auto r = scalar("GGGG" "ACGTACGTACGTACGTACGT" "CCCC", "TTTTTACGTACGTACGTACGTACGTTTTTT",
                        ScoringScheme{1, -4, -6, -1, 1});
  EXPECT_EQ(r.cigar.to_string(), "4S20M4S");
  EXPECT_EQ(r.ref_start, 5u);
  EXPECT_EQ(r.score, 20);
}

TEST(ScalarDp, InsertionInRead) {
  const std::string flank_a = "ACGTTGCAAGCTTACGGATC";
  const std::string flank_b = "TTAGCCGATAGCATGCACTG";
  const auto r = scalar(flank_a + "GGG" + flank_b, flank_a + flank_b);
  EXPECT_EQ(r.cigar.to_string(), "20M3I20M");
  EXPECT_EQ(r.score, 40 - 6 - 2);
}

TEST(ScalarDp, RejectsOutOfBoundsInputs) {
  const ScoringScheme s;
  EXPECT_THROW(scalar("", "ACGT"), std::invalid_argument);
  EXPECT_THROW(scalar("ACGT", ""), std::invalid_argument);
  EXPECT_THROW(scalar(std::string(512, 'A'), std::string(512, 'A')), std::invalid_argument);
  EXPECT_THROW(scalar("ACGT", std::string(2 * 4 + kDefaultWindowSlack + 1, 'A')), std::invalid_argument);
  EXPECT_NO_THROW(scalar("ACGT", std::string(2 * 4 + kDefaultWindowSlack, 'A')));
  EXPECT_THROW(scalar(std::string(300, 'A'), std::string(300, 'A'), ScoringScheme{2, -4, -6, -1, 20}),
               std::invalid_argument);
  EXPECT_THROW(scalar("ACGT", "ACGT", ScoringScheme{1, -4, -1, -6, 20}), std::invalid_argument);
}

TEST(ScalarDp, AgreesWithGapEnumerationOnRandomInputs) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 400; ++n) {
    const std::string read = random_dna(1 + rng() % 30, rng);
    std::string window = random_dna(1 + rng() % 40, rng);
    if (rng() % 2 && window.size() > read.size()) window.replace(rng() % (window.size() - read.size()), read.size(), read);
    const ScoringScheme s{1 + static_cast<int>(rng() % 3), -1 - static_cast<int>(rng() % 5),
                          -2 - static_cast<int>(rng() % 6), -1, 1};
    const auto r = scalar_affine_dp(encode(read), encode(window), s);
    ASSERT_EQ(r.score, support::local_score_by_gap_enumeration(read, window, s.match_bonus, s.mismatch_penalty,
                                                               s.gap_open_penalty, s.gap_extend_penalty))
        << read << " / " << window;
  }
}

TEST(DiagonalDp, SingleLaneMatchesScalarOnFixtures) {
  const std::pair<std::string, std::string> cases[] = {
      {"ACGTACGTAC", "ACGTACGTAC"},
      {"AAAAAAAAAATTTTTTTTTT", "AAAAAAAAAATTTTTTTTTTG"},
      {"AAAAAAAAAATTTTTTTTTT", "AAAAAAAAAAGTTTTTTTTTT"},
      {"TTTT", "AAAA"},
  };
  for (const auto& [read, window] : cases) EXPECT_EQ(diagonal(read, window, 1), scalar(read, window));
}

TEST(DiagonalDp, ShortDiagonalsUsePartialSteps) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const std::string read = random_dna(5, rng);
    const std::string window = random_dna(5, rng);
    const ScoringScheme s{1, -4, -6, -1, 1};
    ASSERT_EQ(diagonal(read, window, 16, s), scalar(read, window, s)) << read << " / " << window;
  }
}

TEST(DiagonalDp, DirectedBoundaryCases) {
  const ScoringScheme s{1, -4, -6, -1, 1};
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"A", "A"},
      {"A", "C"},
      {"A", "ACGTACGT"},
      {"ACGTACGT", "A"},
      {"ACGTTGCA", "ACGTTGCA"},
      {std::string(64, 'A'), std::string(64, 'A')},
      {std::string(40, 'A'), std::string(40, 'C')},
      {"ACGTACGTACGTACGTACGTACGT", "ACGTAC"},
      {std::string(33, 'G'), std::string(17, 'G')},
      {"ACGTACGTAAACGTACGT", "ACGTACGTACGTACGTACGTACGT"},
  };
  for (const auto& [read, window] : cases)
    for (auto lanes : kLaneCounts) EXPECT_EQ(diagonal(read, window, lanes, s), scalar(read, window, s)) << lanes;
}

TEST(DiagonalDp, RandomEquivalenceAcrossLaneCounts) {
  std::mt19937_64 rng(2024);
  DiagonalWorkspace ws;
  for (int n = 0; n < 2500; ++n) {
    const std::size_t m = 1 + rng() % 128;
    std::string read = random_dna(m, rng);
    std::string window = random_dna(1 + rng() % 256, rng);
    // Plant a mutated copy of the read in half the cases so alignments are non-trivial.
    if (rng() % 2 && window.size() >= m) {
      std::string copy = read;
      for (auto& c : copy)
        if (rng() % 20 == 0) c = "ACGT"[rng() & 3];
      window.replace(rng() % (window.size() - m + 1), m, copy);
    }
    const auto r = encode(read), w = encode(window);
    const auto expected = scalar_affine_dp(r, w, ScoringScheme{});
    for (auto lanes : kLaneCounts)
      ASSERT_EQ(diagonal_affine_dp(r, w, ScoringScheme{}, lanes, ws), expected) << read << " / " << window;
  }
}

TEST(DiagonalDp, RejectsUnsupportedLaneCounts) {
  EXPECT_THROW(diagonal("ACGT", "ACGT", 2), std::invalid_argument);
  EXPECT_THROW(diagonal("ACGT", "ACGT", 32), std::invalid_argument);
}

TEST(DpProperties, CigarConservationAndRescoring) {
  std::mt19937_64 rng(99);
  const ScoringScheme s{1, -4, -6, -1, 1};
  for (int n = 0; n < 1000; ++n) {
    const std::string read = random_dna(1 + rng() % 80, rng);
    std::string window = random_dna(1 + rng() % 160, rng);
    if (window.size() > read.size() + 4) {
      std::string copy = read;
      if (copy.size() > 10) copy.erase(copy.size() / 2, 1 + rng() % 3);
      window.replace(rng() % (window.size() - read.size()), copy.size(), copy);
    }
    const auto r = diagonal_affine_dp(encode(read), encode(window), s, 16);
    expect_conserved(r, read.size());
    if (r.score > 0) {
      EXPECT_EQ(score_alignment(r.cigar, encode(read), encode(window), r.ref_start, s), r.score);
      EXPECT_NE(r.cigar.ops().front().op == 'S' ? r.cigar.ops()[1].op : r.cigar.ops().front().op, 'D');
    }
  }
}

TEST(DpProperties, LargerMatchBonusNeverLowersTheScore) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 300; ++n) {
    const std::string read = random_dna(1 + rng() % 60, rng);
    const std::string window = random_dna(1 + rng() % 100, rng);
    int prev = -1;
    for (int bonus = 1; bonus <= 4; ++bonus) {
      const int score = scalar(read, window, ScoringScheme{bonus, -4, -6, -1, 1}).score;
      ASSERT_GE(score, prev);
      prev = score;
    }
  }
}

TEST(ExtractWindow, ClipsAtSequenceEdges) {
  std::mt19937_64 rng(1);
  const std::string chr = random_dna(500, rng);
  const auto index = build_index(std::vector<NamedSequence>{{"c", chr}});

  auto w = extract_window(index, SeedHit{0, 0, Strand::Forward, 0, 0}, 50, 5);
  EXPECT_EQ(w.origin, 0u);
  EXPECT_EQ(w.bases.size(), 55u);

  w = extract_window(index, SeedHit{0, 200, Strand::Forward, 0, 0}, 50, 32);
  EXPECT_EQ(w.origin, 168u);
  EXPECT_EQ(w.bases.size(), 50u + 64u);
  EXPECT_EQ(decode(w.bases), chr.substr(168, 114));

  w = extract_window(index, SeedHit{0, 480, Strand::Reverse, 0, 0}, 50, 10);
  EXPECT_EQ(w.origin, 470u);
  EXPECT_EQ(decode(w.bases), chr.substr(470));
}
