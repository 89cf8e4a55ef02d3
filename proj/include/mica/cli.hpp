#ifndef MICA_CLI_HPP
#define MICA_CLI_HPP

// `mica index` and `mica align`. Exit codes: 0 success, 1 finished but
// skipped malformed input records (lenient mode), 2 fatal error or bad usage.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mica/index_io.hpp"
#include "mica/io/reads.hpp"
#include "mica/io/sam.hpp"
#include "mica/pipeline.hpp"
#include "mica/reference_index.hpp"

namespace mica::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSkipped = 1;
inline constexpr int kExitFatal = 2;

struct IndexOptions {
  std::string reference_path;
  std::string out_path;
  std::uint32_t sa_rate = 8;
  std::uint64_t seed = IndexParams{}.ambiguity_seed;
};

struct AlignOptions {
  std::string index_path;
  std::vector<std::string> read_paths;
  std::string output = "-";
  PipelineConfig pipeline;
  bool lenient = false;
  std::string report_path;
  std::string report_json_path;

  /// Every setting as long options, in a fixed order. Feeding this back to
  /// the CLI reproduces the same configuration.
  std::string to_command_line() const {
    const auto& p = pipeline;
    const auto& a = p.aligner;
    std::ostringstream os;
    os << "mica align --index " << index_path << " --output " << output << " --batch-size " << p.batch_size
       << " --worker-groups " << p.worker_groups << " --workers-per-group " << p.workers_per_group
       << " --mismatches " << a.budget.max_mismatches << " --max-hits " << a.budget.max_hits << " --max-states "
       << a.budget.max_states << " --match " << a.scoring.match_bonus << " --mismatch=" << a.scoring.mismatch_penalty
       << " --gap-open=" << a.scoring.gap_open_penalty << " --gap-extend=" << a.scoring.gap_extend_penalty
       << " --min-score=" << a.scoring.min_report_score << " --lanes " << a.lanes << " --window-margin "
       << a.window_margin << " --min-seed-length " << a.min_seed_length << " --insert-min " << p.insert.min_insert
       << " --insert-max " << p.insert.max_insert << " --insert-auto " << (p.auto_insert ? "true" : "false")
       << " --ordered-output " << (p.ordered_output ? "true" : "false") << " --secondary " << p.max_secondary
       << " --lenient " << (lenient ? "true" : "false");
    if (!report_path.empty()) os << " --report " << report_path;
    if (!report_json_path.empty()) os << " --report-json " << report_json_path;
    for (const auto& r : read_paths) os << ' ' << r;
    return os.str();
  }
};

inline int cmd_index(const IndexOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    if (!std::filesystem::exists(opt.reference_path)) {
      err << "mica index: reference file not found: " << opt.reference_path << '\n';
      return kExitFatal;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto seqs = read_reference(opt.reference_path);
    const auto index = build_index(seqs, IndexParams{opt.sa_rate, opt.seed});
    save_index(index, opt.out_path);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (index.replaced_count() > 0)
      err << "mica index: warning: replaced " << index.replaced_count() << " ambiguous bases\n";
    out << "sequences=" << index.sequences().size() << '\n'
        << "reference_length=" << index.forward_length() << '\n'
        << "replaced_bases=" << index.replaced_count() << '\n'
        << "build_seconds=" << secs << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    err << "mica index: " << e.what() << '\n';
    return kExitFatal;
  }
}

inline int cmd_align(const AlignOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    for (const auto& p : opt.read_paths) {
      if (!std::filesystem::exists(p)) {
        err << "mica align: read file not found: " << p << '\n';
        return kExitFatal;
      }
    }
    const auto index = load_index(opt.index_path);
    std::vector<std::filesystem::path> paths(opt.read_paths.begin(), opt.read_paths.end());
    FragmentReader reader(paths, opt.lenient ? ParseMode::Lenient : ParseMode::Strict);
    const auto header = SamHeader::from_index(index, opt.to_command_line());

    PipelineReport report;
    if (opt.output == "-") {
      report = run_pipeline(reader, index, opt.pipeline, out, header);
    } else {
      std::ofstream file(opt.output, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open output: " + opt.output);
      report = run_pipeline(reader, index, opt.pipeline, file, header);
    }

    err << report.to_key_value();
    if (!opt.report_path.empty()) {
      std::ofstream f(opt.report_path);
      f << report.to_key_value();
    }
    if (!opt.report_json_path.empty()) {
      std::ofstream f(opt.report_json_path);
      f << report.to_json().dump(2) << '\n';
    }
    if (report.skipped_records > 0) {
      err << "mica align: warning: skipped " << report.skipped_records << " malformed records\n";
      return kExitSkipped;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "mica align: " << e.what() << '\n';
    return kExitFatal;
  }
}

/// Entry point shared by the executable and the tests.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"mica: BWT seed search + anti-diagonal affine-gap DP short-read aligner", "mica"};
  app.require_subcommand(1);

  IndexOptions iopt;
  auto* index_cmd = app.add_subcommand("index", "Build an FM-index from a FASTA reference");
  index_cmd->add_option("reference", iopt.reference_path, "Reference FASTA (optionally gzipped)")->required();
  index_cmd->add_option("output", iopt.out_path, "Index file to write")->required();
  index_cmd->add_option("--sa-rate", iopt.sa_rate, "Suffix array sampling rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  index_cmd->add_option("--seed", iopt.seed, "Seed for replacing ambiguous bases")->capture_default_str();

  AlignOptions aopt;
  auto& p = aopt.pipeline;
  auto& a = p.aligner;
  auto* align_cmd = app.add_subcommand("align", "Align FASTQ/FASTA reads and write SAM");
  align_cmd->add_option("reads", aopt.read_paths, "One read file, or two for paired-end")->required()->expected(1, 2);
  align_cmd->add_option("--index", aopt.index_path, "Index built by `mica index`")->required();
  align_cmd->add_option("-o,--output", aopt.output, "SAM output path, '-' for stdout")->capture_default_str();
  align_cmd->add_option("--batch-size", p.batch_size, "Fragments per batch")->capture_default_str()->check(CLI::PositiveNumber);
  align_cmd->add_option("--worker-groups", p.worker_groups, "Controller + worker pool groups")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  align_cmd->add_option("--workers-per-group", p.workers_per_group, "Worker threads per group")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  align_cmd->add_option("--mismatches", a.budget.max_mismatches, "Mismatches allowed in BWT search")->capture_default_str();
  align_cmd->add_option("--max-hits", a.budget.max_hits, "Hits before a read is deferred")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  align_cmd->add_option("--max-states", a.budget.max_states, "Search states before a read is deferred")
      ->capture_default_str();
  align_cmd->add_option("--match", a.scoring.match_bonus, "Match bonus")->capture_default_str();
  align_cmd->add_option("--mismatch", a.scoring.mismatch_penalty, "Mismatch penalty (negative)")->capture_default_str();
  align_cmd->add_option("--gap-open", a.scoring.gap_open_penalty, "Gap open penalty (negative)")->capture_default_str();
  align_cmd->add_option("--gap-extend", a.scoring.gap_extend_penalty, "Gap extend penalty (negative)")
      ->capture_default_str();
  align_cmd->add_option("--min-score", a.scoring.min_report_score, "Minimum reported alignment score")
      ->capture_default_str();
  align_cmd->add_option("--lanes", a.lanes, "DP lanes per step")->capture_default_str()->check(CLI::IsMember({1, 4, 8, 16}));
  align_cmd->add_option("--window-margin", a.window_margin, "Reference bases added around each seed hit")
      ->capture_default_str();
  align_cmd->add_option("--min-seed-length", a.min_seed_length, "Shortest read searched in the BWT")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  align_cmd->add_option("--insert-min", p.insert.min_insert, "Minimum proper-pair template length")->capture_default_str();
  align_cmd->add_option("--insert-max", p.insert.max_insert, "Maximum proper-pair template length")->capture_default_str();
  align_cmd->add_option("--insert-auto", p.auto_insert, "Estimate the insert window from the data (true/false)")
      ->capture_default_str();
  align_cmd->add_option("--ordered-output", p.ordered_output, "Emit records in input order (true/false)")
      ->capture_default_str();
  align_cmd->add_option("--secondary", p.max_secondary, "Secondary alignments to emit per read")->capture_default_str();
  align_cmd->add_option("--lenient", aopt.lenient, "Skip malformed records instead of failing (true/false)")
      ->capture_default_str();
  align_cmd->add_option("--report", aopt.report_path, "Write the key=value run report here");
  align_cmd->add_option("--report-json", aopt.report_json_path, "Write the run report as JSON here");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mica: " << e.what() << "\nRun with --help for usage.\n";
    return kExitFatal;
  }

  if (index_cmd->parsed()) return cmd_index(iopt, out, err);
  return cmd_align(aopt, out, err);
}

/// Split a command line on spaces, dropping the leading program name.
inline std::vector<std::string> split_command_line(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> args;
  std::string tok;
  while (is >> tok) args.push_back(tok);
  if (!args.empty()) args.erase(args.begin());
  return args;
}

}  // namespace mica::cli

#endif  // MICA_CLI_HPP
