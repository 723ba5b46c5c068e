#include <crowdens/cli.hpp>

#include <crowdens/consensus.hpp>
#include <crowdens/io.hpp>
#include <crowdens/metrics.hpp>
#include <crowdens/service.hpp>
#include <crowdens/simulate.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace crowdens::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads each path at most once so "-" can appear in several row specs.
class Inputs {
 public:
  explicit Inputs(std::istream& in) : in_(in) {}

  const SolutionsFile& solutions(const std::string& path) {
    auto it = cache_.find(path);
    if (it != cache_.end()) return it->second;
    SolutionsFile file;
    if (path == "-") {
      file = read_solutions(in_);
    } else {
      std::ifstream f(path);
      if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
      file = read_solutions(f);
    }
    return cache_.emplace(path, std::move(file)).first->second;
  }

 private:
  std::istream& in_;
  std::map<std::string, SolutionsFile> cache_;
};

bool is_literal_row(const std::string& spec) {
  return !spec.empty() && spec.find_first_not_of("0123456789, ") == std::string::npos;
}

/// Row specs: a literal label list ("1,1,2,1,3"), "<file>:<worker_id>", or
/// "<file>:#<n>" for the n-th data row (1-based).
Partition resolve_row(const std::string& spec, Inputs& inputs) {
  if (is_literal_row(spec)) {
    std::vector<std::int64_t> labels;
    std::string cell;
    std::istringstream cells(spec);
    while (std::getline(cells, cell, ',')) {
      const auto first = cell.find_first_not_of(' ');
      const auto last = cell.find_last_not_of(' ');
      if (first == std::string::npos) throw UsageError("empty label in row '" + spec + "'");
      std::int64_t v = 0;
      const char* b = cell.data() + first;
      const char* e = cell.data() + last + 1;
      const auto [end, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || end != e) throw UsageError("malformed row '" + spec + "'");
      labels.push_back(v);
    }
    return canonicalize(std::span<const std::int64_t>(labels));
  }
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == spec.size())
    throw UsageError("row spec '" + spec + "' is neither a label list nor <file>:<worker>|#<n>");
  const std::string path = spec.substr(0, colon);
  const std::string selector = spec.substr(colon + 1);
  const SolutionsFile& file = inputs.solutions(path);
  if (selector.front() == '#') {
    std::size_t n = 0;
    const auto [end, ec] = std::from_chars(selector.data() + 1, selector.data() + selector.size(), n);
    if (ec != std::errc() || end != selector.data() + selector.size() || n == 0)
      throw UsageError("bad row number in '" + spec + "'");
    if (n > file.solutions.size())
      throw Error(ErrorCode::ParseError, path + " has only " + std::to_string(file.solutions.size()) + " rows");
    return file.solutions[n - 1];
  }
  for (std::size_t i = 0; i < file.worker_ids.size(); ++i)
    if (file.worker_ids[i] == selector) return file.solutions[i];
  throw Error(ErrorCode::ParseError, "no worker '" + selector + "' in " + path);
}

void write_report(const std::string& path, const EvaluationReport& report) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
  f << report_to_json(report).dump(2) << '\n';
}

std::string join_labels(std::span<const Label> labels) {
  std::string s;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(labels[i]);
  }
  return s;
}

int serve(const std::string& listen, const std::string& data_dir, std::size_t min_submissions,
          std::ostream& out) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen expects host:port");
  int port = 0;
  const auto [end, ec] = std::from_chars(listen.data() + colon + 1, listen.data() + listen.size(), port);
  if (ec != std::errc() || end != listen.data() + listen.size() || port < 0 || port > 65535)
    throw UsageError("--listen expects host:port");
  const std::string host = listen.substr(0, colon);

  CollectService service(ServiceConfig{data_dir, min_submissions, utc_timestamp});
  HttpServer server(service);
  const int bound = server.bind(host, port);
  out << "listening on http://" << host << ':' << bound << std::endl;
  if (!service.quarantined().empty())
    out << "quarantined " << service.quarantined().size() << " corrupt store lines" << std::endl;
  server.listen();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consensus clustering for crowd-collected partitions"};
  app.name("crowdens");
  app.require_subcommand(1);

  std::string row_a, row_b;
  auto* ari = app.add_subcommand("ari", "Adjusted Rand index between two rows");
  ari->add_option("a", row_a, "First row spec")->required();
  ari->add_option("b", row_b, "Second row spec")->required();
  auto* rand = app.add_subcommand("rand", "Rand index between two rows");
  rand->add_option("a", row_a, "First row spec")->required();
  rand->add_option("b", row_b, "Second row spec")->required();

  const std::vector<std::string> modes{"medoid", "vote"};
  std::string input, report_path, truth_spec;
  std::string mode_text = "vote";
  auto* cons = app.add_subcommand("consensus", "Consensus partition of a solutions file");
  cons->add_option("--input", input, "Solutions file, '-' for stdin")->required();
  cons->add_option("--mode", mode_text, "medoid or vote")->check(CLI::IsMember(modes));
  cons->add_option("--report", report_path, "Write the JSON evaluation report here");

  auto* eval = app.add_subcommand("evaluate", "Score the consensus against inputs and an expert row");
  eval->add_option("--input", input, "Solutions file, '-' for stdin")->required();
  eval->add_option("--truth", truth_spec, "Expert row spec")->required();
  eval->add_option("--mode", mode_text, "medoid or vote")->check(CLI::IsMember(modes));
  eval->add_option("--report", report_path, "Write the JSON evaluation report here");

  std::size_t objects = 0, clusters = 0, workers = 0;
  double noise = 0.0, split = 0.0, merge = 0.0;
  std::uint64_t seed = 0;
  std::string output = "-";
  auto* sim = app.add_subcommand("simulate", "Write a synthetic crowd ensemble");
  sim->add_option("--objects", objects, "Objects per solution")->required();
  sim->add_option("--clusters", clusters, "Clusters in the round-robin truth")->required();
  sim->add_option("--workers", workers, "Number of simulated workers")->required();
  sim->add_option("--noise", noise, "Per-object reassignment probability");
  sim->add_option("--split", split, "Cluster split probability");
  sim->add_option("--merge", merge, "Cluster merge probability");
  sim->add_option("--seed", seed, "Random seed");
  sim->add_option("--output", output, "Output path, '-' for stdout");

  std::string listen = "127.0.0.1:8080", data_dir = "data";
  std::size_t min_submissions = 3;
  auto* srv = app.add_subcommand("serve", "Run the crowd collection service");
  srv->add_option("--listen", listen, "host:port");
  srv->add_option("--data-dir", data_dir, "Directory for the record stores");
  srv->add_option("--min-submissions", min_submissions, "Submissions needed before consensus");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  Inputs inputs(in);
  try {
    if (*ari || *rand) {
      const Partition a = resolve_row(row_a, inputs);
      const Partition b = resolve_row(row_b, inputs);
      out << format_score(*ari ? adjusted_rand_index(a, b) : rand_index(a, b)) << '\n';
    } else if (*cons || *eval) {
      const FusionMode mode = *parse_fusion_mode(mode_text);
      const SolutionsFile& file = inputs.solutions(input);
      std::optional<Partition> truth;
      if (*eval) truth = resolve_row(truth_spec, inputs);
      const ConsensusResult result = consensus(file.ensemble(), mode);
      const EvaluationReport report = make_report(file, result, mode, truth);
      if (*cons) {
        out << "consensus: " << join_labels(result.consensus.labels()) << '\n'
            << "centroid_index: " << result.centroid_index << '\n'
            << "centroid_worker: " << report.centroid_worker << '\n'
            << "centroid_k: " << result.centroid_k << '\n'
            << "mean_ari: " << format_score(result.mean_ari) << '\n';
      } else {
        out << "mean_ari_vs_inputs: " << format_score(report.mean_ari) << '\n'
            << "ari_vs_truth: " << format_score(report.truth->ari) << '\n';
      }
      if (!report_path.empty()) write_report(report_path, report);
    } else if (*sim) {
      SimConfig cfg{round_robin_partition(objects, clusters), workers, noise, split, merge, seed};
      validate(cfg);
      std::vector<std::string> ids;
      for (std::size_t w = 1; w <= workers; ++w) ids.push_back("w" + std::to_string(w));
      const SolutionsFile file = make_solutions_file(generate_ensemble(cfg), std::move(ids));
      if (output == "-") {
        write_solutions(out, file);
      } else {
        std::ofstream f(output, std::ios::trunc);
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + output);
        write_solutions(f, file);
      }
    } else if (*srv) {
      return serve(listen, data_dir, min_submissions, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? kExitUsage : kExitData;
  }
  return kExitOk;
}

}  // namespace crowdens::cli
