#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "mica/io/sam.hpp"
#include "support/sam_check.hpp"
#include "support/temp_dir.hpp"

using namespace mica;

namespace {

ReadRecord read(std::string name, std::string bases) {
  ReadRecord r;
  r.name = std::move(name);
  r.qualities.assign(bases.size(), 'I');
  r.bases = std::move(bases);
  return r;
}

Placement place(std::uint32_t seq, std::uint64_t pos, Strand strand, int score, const std::string& cigar) {
  return Placement{seq, pos, strand, score, *Cigar::parse(cigar), 0};
}

const std::vector<SequenceInfo> kSeqs = {{"chr1", 1000, 0}, {"chr2", 500, 1000}};

}  // namespace

TEST(Mapq, Rules) {
  EXPECT_EQ(mapq_estimate(50, std::nullopt, 1), 60);
  EXPECT_EQ(mapq_estimate(50, 50, 2), 0);
  EXPECT_EQ(mapq_estimate(50, 46, 2), 24);
  EXPECT_EQ(mapq_estimate(50, 10, 2), 60);
  EXPECT_EQ(mapq_estimate(50, 10, 33), 3);
  EXPECT_EQ(mapq_estimate(50, 50, 33), 0);
}

TEST(InsertModel, ValidationAndAcceptance) {
  EXPECT_THROW((InsertModel{0, 10}.validate()), std::invalid_argument);
  EXPECT_THROW((InsertModel{20, 10}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((InsertModel{10, 10}.validate()));
  EXPECT_TRUE((InsertModel{300, 500}.accepts(300)));
  EXPECT_TRUE((InsertModel{300, 500}.accepts(500)));
  EXPECT_FALSE((InsertModel{300, 500}.accepts(501)));
}

TEST(InsertModel, EstimateIsMedianPlusMinusFourMad) {
  const auto m = estimate_insert_model({380, 390, 400, 410, 420});
  ASSERT_TRUE(m);
  EXPECT_EQ(m->min_insert, 400 - 40);
  EXPECT_EQ(m->max_insert, 400 + 40);
  EXPECT_FALSE(estimate_insert_model({}));
}

TEST(ResolvePair, BothUnmapped) {
  const auto out = resolve_pair(read("p", "ACGT"), {}, read("p", "TTTT"), {}, InsertModel{});
  EXPECT_FALSE(out.proper);
  for (const auto* r : {&out.first, &out.second}) {
    EXPECT_TRUE(r->has(sam_flag::kUnmapped));
    EXPECT_TRUE(r->has(sam_flag::kMateUnmapped));
    EXPECT_TRUE(r->has(sam_flag::kPaired));
    EXPECT_FALSE(r->has(sam_flag::kProperPair));
    EXPECT_EQ(r->ref_id, -1);
    EXPECT_EQ(r->pos, 0u);
  }
  EXPECT_TRUE(out.first.has(sam_flag::kFirst));
  EXPECT_TRUE(out.second.has(sam_flag::kSecond));
}

TEST(ResolvePair, ConcordantPairIsProper) {
  const std::vector<Placement> c1 = {place(0, 100, Strand::Forward, 50, "50M")};
  const std::vector<Placement> c2 = {place(0, 450, Strand::Reverse, 50, "50M")};
  const auto out = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c2,
                                InsertModel{300, 500});
  EXPECT_TRUE(out.proper);
  EXPECT_TRUE(out.first.has(sam_flag::kProperPair));
  EXPECT_TRUE(out.second.has(sam_flag::kProperPair));
  EXPECT_EQ(out.first.template_length, 400);
  EXPECT_EQ(out.second.template_length, -400);
  EXPECT_TRUE(out.first.has(sam_flag::kMateReverse));
  EXPECT_TRUE(out.second.has(sam_flag::kReverse));
  EXPECT_EQ(out.first.mate_pos, 451u);
  EXPECT_EQ(out.second.mate_pos, 101u);
}

TEST(ResolvePair, TooLongTemplateIsNotProper) {
  const std::vector<Placement> c1 = {place(0, 100, Strand::Forward, 50, "50M")};
  const std::vector<Placement> c2 = {place(0, 650, Strand::Reverse, 50, "50M")};
  const auto out = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c2,
                                InsertModel{300, 500});
  EXPECT_FALSE(out.proper);
  EXPECT_TRUE(out.first.mapped());
  EXPECT_TRUE(out.second.mapped());
  EXPECT_FALSE(out.first.has(sam_flag::kProperPair));
  EXPECT_EQ(out.first.template_length, 600);
  EXPECT_EQ(out.second.template_length, -600);
}

TEST(ResolvePair, WrongOrientationIsNotProper) {
  // Reverse mate to the left of the forward mate.
  const std::vector<Placement> c1 = {place(0, 500, Strand::Forward, 50, "50M")};
  const std::vector<Placement> c2 = {place(0, 200, Strand::Reverse, 50, "50M")};
  EXPECT_FALSE(resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c2,
                            InsertModel{100, 1000})
                   .proper);
  // Same strand.
  const std::vector<Placement> c3 = {place(0, 400, Strand::Forward, 50, "50M")};
  EXPECT_FALSE(resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c3,
                            InsertModel{100, 1000})
                   .proper);
  // Different sequences.
  const std::vector<Placement> c4 = {place(1, 300, Strand::Reverse, 50, "50M")};
  const auto out = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c4,
                                InsertModel{100, 1000});
  EXPECT_FALSE(out.proper);
  EXPECT_EQ(out.first.template_length, 0);
}

TEST(ResolvePair, PrefersAConcordantPairOverSeparateBests) {
  const std::vector<Placement> c1 = {place(1, 10, Strand::Forward, 60, "60M"), place(0, 100, Strand::Forward, 55, "60M")};
  const std::vector<Placement> c2 = {place(0, 400, Strand::Reverse, 58, "60M")};
  const auto out = resolve_pair(read("p", std::string(60, 'A')), c1, read("p", std::string(60, 'C')), c2,
                                InsertModel{100, 1000});
  EXPECT_TRUE(out.proper);
  EXPECT_EQ(out.first.ref_id, 0);
  EXPECT_EQ(out.first.pos, 101u);
  EXPECT_EQ(out.first.mapq, 0);  // the unpaired runner-up outscores the chosen placement
}

TEST(ResolvePair, UnmappedMateSitsAtPartnerPosition) {
  const std::vector<Placement> c1 = {place(0, 100, Strand::Reverse, 50, "50M")};
  const auto out = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", "ACGT"), {}, InsertModel{});
  EXPECT_TRUE(out.first.mapped());
  EXPECT_TRUE(out.first.has(sam_flag::kMateUnmapped));
  EXPECT_FALSE(out.second.mapped());
  EXPECT_EQ(out.second.ref_id, 0);
  EXPECT_EQ(out.second.pos, 101u);
  EXPECT_TRUE(out.second.has(sam_flag::kMateReverse));
  EXPECT_EQ(out.first.template_length, 0);
  const std::string line = format_record(out.second, kSeqs);
  EXPECT_EQ(line, "p\t" + std::to_string(out.second.flags) + "\tchr1\t101\t0\t*\t=\t101\t0\tACGT\tIIII\n");
}

TEST(ResolvePair, SecondariesWhenRequested) {
  const std::vector<Placement> c1 = {place(0, 100, Strand::Forward, 50, "50M"), place(0, 700, Strand::Forward, 45, "50M"),
                                     place(1, 5, Strand::Forward, 40, "50M")};
  const std::vector<Placement> c2 = {place(0, 300, Strand::Reverse, 50, "50M")};
  const auto none = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c2, {}, 0);
  EXPECT_TRUE(none.secondary.empty());
  const auto some = resolve_pair(read("p", std::string(50, 'A')), c1, read("p", std::string(50, 'C')), c2, {}, 1);
  ASSERT_EQ(some.secondary.size(), 1u);
  EXPECT_TRUE(some.secondary[0].has(sam_flag::kSecondary));
  EXPECT_EQ(some.secondary[0].pos, 701u);
}

TEST(SingleEnd, RecordsAndSecondaryCap) {
  const std::vector<Placement> c = {place(0, 9, Strand::Forward, 30, "30M"), place(0, 500, Strand::Reverse, 28, "30M")};
  const auto primary_only = single_end_records(read("s", std::string(30, 'G')), c);
  ASSERT_EQ(primary_only.size(), 1u);
  EXPECT_EQ(primary_only[0].flags, 0);
  EXPECT_EQ(primary_only[0].pos, 10u);
  EXPECT_EQ(primary_only[0].mapq, 12);
  const auto with_secondary = single_end_records(read("s", std::string(30, 'G')), c, 5);
  ASSERT_EQ(with_secondary.size(), 2u);
  EXPECT_EQ(with_secondary[1].flags, sam_flag::kSecondary | sam_flag::kReverse);
  EXPECT_EQ(with_secondary[1].bases, std::string(30, 'C'));
  const auto unmapped = single_end_records(read("u", "ACGT"), {});
  ASSERT_EQ(unmapped.size(), 1u);
  EXPECT_EQ(format_record(unmapped[0], kSeqs), "u\t4\t*\t0\t0\t*\t*\t0\t0\tACGT\tIIII\n");
}

TEST(WriteSam, HeaderOnlyForNoRecords) {
  SamHeader h{kSeqs, "mica", "0.1.0", "mica align x"};
  std::ostringstream os;
  write_sam(h, {}, os);
  EXPECT_EQ(os.str(), "@HD\tVN:1.6\tSO:unsorted\n@SQ\tSN:chr1\tLN:1000\n@SQ\tSN:chr2\tLN:500\n"
                      "@PG\tID:mica\tPN:mica\tVN:0.1.0\tCL:mica align x\n");
}

TEST(WriteSam, MatchesGoldenFile) {
  ReadRecord r1 = read("r1", "ACGTACGTAC");
  ReadRecord r2 = read("r2", "GGGG");
  ReadRecord r3{"r3", "CCGGTAAA", "ABCDEFGH", 2, MateSide::None};
  std::vector<AlignmentRecord> records;
  auto add = [&](std::vector<AlignmentRecord> v) { records.insert(records.end(), v.begin(), v.end()); };
  add(single_end_records(r1, std::vector<Placement>{place(0, 99, Strand::Forward, 10, "10M")}));
  add(single_end_records(r2, {}));
  add(single_end_records(r3, std::vector<Placement>{place(1, 6, Strand::Reverse, 6, "2S6M"),
                                                    place(0, 40, Strand::Forward, 2, "6S2M")}));
  std::ostringstream os;
  write_sam(SamHeader{kSeqs, "mica", "0.1.0", "mica align --index ref.idx reads.fq"}, records, os);
  EXPECT_EQ(os.str(), support::slurp(MICA_TEST_DATA_DIR "/golden_small.sam"));
  for (const auto& line : support::parse_sam(os.str()).records) {
    std::string joined;
    for (std::size_t k = 0; k < line.fields.size(); ++k) joined += (k ? "\t" : "") + line.fields[k];
    EXPECT_EQ(support::sam_line_problem(joined), "") << joined;
  }
}

TEST(WriteSam, ReverseStrandStoresReverseComplement) {
  const ReadRecord r{"rv", "AACGTTTG", "12345678", 0, MateSide::None};
  const auto recs = single_end_records(r, std::vector<Placement>{place(0, 0, Strand::Reverse, 8, "8M")});
  EXPECT_EQ(recs[0].bases, reverse_complement(r.bases));
  EXPECT_EQ(recs[0].qualities, "87654321");
  EXPECT_TRUE(recs[0].has(sam_flag::kReverse));
}

TEST(WriteSam, FailingSinkThrows) {
  std::ostringstream os;
  os.setstate(std::ios::badbit);
  EXPECT_THROW(write_sam(SamHeader{kSeqs, "mica", "0.1.0", ""}, {}, os), std::runtime_error);
}

TEST(SamGrammar, CheckerRejectsBrokenLines) {
  EXPECT_EQ(support::sam_line_problem("r\t0\tchr1\t1\t60\t4M\t*\t0\t0\tACGT\tIIII"), "");
  EXPECT_NE(support::sam_line_problem("r\t0\tchr1\t1\t60\t4M\t*\t0\t0\tACGT"), "");
  EXPECT_NE(support::sam_line_problem("r\t0\tchr1\t1\t60\t4Q\t*\t0\t0\tACGT\tIIII"), "");
  EXPECT_NE(support::sam_line_problem("r\t0\tchr1\t1\t60\t3M\t*\t0\t0\tACGT\tIIII"), "");
  EXPECT_NE(support::sam_line_problem("r\t70000\tchr1\t1\t60\t4M\t*\t0\t0\tACGT\tIIII"), "");
}
