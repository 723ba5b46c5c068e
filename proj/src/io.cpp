#include <crowdens/io.hpp>
#include <crowdens/metrics.hpp>

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace crowdens {
namespace {

std::string where(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string object_header(std::size_t i) { return "object_" + std::to_string(i); }

}  // namespace

Ensemble SolutionsFile::ensemble() const {
  if (solutions.empty()) throw Error(ErrorCode::EmptyEnsemble, "solutions file has no rows");
  return Ensemble(solutions);
}

bool is_valid_worker_id(std::string_view id) noexcept {
  if (id.empty() || trim(id).size() != id.size()) return false;
  return id.find_first_of(",\r\n") == std::string_view::npos;
}

SolutionsFile read_solutions(std::istream& in) {
  SolutionsFile file;
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  bool saw_blank = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      saw_blank = true;
      continue;
    }
    if (saw_blank) throw Error(ErrorCode::ParseError, where(line_no - 1, 1) + "blank line");
    const std::vector<std::string_view> cells = split_cells(line);

    if (!have_header) {
      if (trim(cells[0]) != kSolutionsVersion)
        throw Error(ErrorCode::ParseError, where(line_no, 1) + "expected format version '" +
                                               std::string(kSolutionsVersion) + "'");
      if (cells.size() < 2)
        throw Error(ErrorCode::ParseError, where(line_no, 2) + "header names no objects");
      for (std::size_t c = 1; c < cells.size(); ++c)
        if (trim(cells[c]) != object_header(c))
          throw Error(ErrorCode::ParseError,
                      where(line_no, c + 1) + "expected header '" + object_header(c) + "'");
      file.object_count = cells.size() - 1;
      have_header = true;
      continue;
    }

    const std::string_view worker = trim(cells[0]);
    if (!is_valid_worker_id(worker))
      throw Error(ErrorCode::ParseError, where(line_no, 1) + "missing or invalid worker id");
    if (cells.size() - 1 != file.object_count)
      throw Error(ErrorCode::RaggedRows, where(line_no, cells.size()) + "row has " +
                                             std::to_string(cells.size() - 1) + " labels, header has " +
                                             std::to_string(file.object_count) + " objects");
    std::vector<std::int64_t> labels;
    labels.reserve(file.object_count);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const std::string_view cell = trim(cells[c]);
      std::int64_t value = 0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
        throw Error(ErrorCode::NonIntegerLabel,
                    where(line_no, c + 1) + "'" + std::string(cell) + "' is not an integer label");
      if (value <= 0)
        throw Error(ErrorCode::NonPositiveLabel,
                    where(line_no, c + 1) + "label " + std::string(cell) + " is not positive");
      labels.push_back(value);
    }
    file.worker_ids.emplace_back(worker);
    file.solutions.push_back(canonicalize(std::span<const std::int64_t>(labels)));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, where(1, 1) + "missing header row");
  return file;
}

SolutionsFile parse_solutions(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_solutions(in);
}

void write_solutions(std::ostream& out, const SolutionsFile& file) {
  out << kSolutionsVersion;
  for (std::size_t i = 1; i <= file.object_count; ++i) out << ',' << object_header(i);
  out << '\n';
  for (std::size_t r = 0; r < file.solutions.size(); ++r) {
    if (!is_valid_worker_id(file.worker_ids[r]))
      throw Error(ErrorCode::ParseError, "worker id '" + file.worker_ids[r] + "' cannot be written");
    out << file.worker_ids[r];
    for (Label l : file.solutions[r].labels()) out << ',' << l;
    out << '\n';
  }
}

std::string format_solutions(const SolutionsFile& file) {
  std::ostringstream out;
  write_solutions(out, file);
  return out.str();
}

SolutionsFile make_solutions_file(const Ensemble& e, std::vector<std::string> worker_ids) {
  if (worker_ids.size() != e.size())
    throw Error(ErrorCode::LengthMismatch, "need one worker id per solution");
  return SolutionsFile{e.object_count(), std::move(worker_ids), e.solutions()};
}

EvaluationReport make_report(const SolutionsFile& file, const ConsensusResult& result,
                             FusionMode mode, const std::optional<Partition>& truth) {
  EvaluationReport report;
  report.mode = mode;
  report.consensus = result.consensus.label_vector();
  report.centroid_index = result.centroid_index;
  report.centroid_worker = file.worker_ids.at(result.centroid_index);
  report.centroid_k = result.centroid_k;
  double ari_total = 0.0;
  double rand_total = 0.0;
  for (std::size_t i = 0; i < file.solutions.size(); ++i) {
    SolutionScore s{file.worker_ids[i], result.per_solution_ari.at(i),
                    rand_index(result.consensus, file.solutions[i])};
    ari_total += s.ari;
    rand_total += s.rand;
    report.solutions.push_back(std::move(s));
  }
  const auto n = static_cast<double>(file.solutions.size());
  report.mean_ari = ari_total / n;
  report.mean_rand = rand_total / n;
  if (truth) {
    report.truth = TruthScore{truth->label_vector(), adjusted_rand_index(result.consensus, *truth),
                              rand_index(result.consensus, *truth)};
  }
  return report;
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json solutions = nlohmann::json::array();
  for (const SolutionScore& s : report.solutions)
    solutions.push_back({{"worker_id", s.worker_id}, {"ari", s.ari}, {"rand", s.rand}});
  nlohmann::json j = {
      {"format", "report-v1"},
      {"mode", to_string(report.mode)},
      {"consensus", report.consensus},
      {"centroid_index", report.centroid_index},
      {"centroid_worker", report.centroid_worker},
      {"centroid_k", report.centroid_k},
      {"solutions", std::move(solutions)},
      {"mean_ari", report.mean_ari},
      {"mean_rand", report.mean_rand},
  };
  if (report.truth)
    j["truth"] = {{"labels", report.truth->labels},
                  {"ari", report.truth->ari},
                  {"rand", report.truth->rand}};
  return j;
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "report-v1")
      throw Error(ErrorCode::ParseError, "unsupported report format");
    EvaluationReport r;
    const auto mode = parse_fusion_mode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::ParseError, "unknown fusion mode in report");
    r.mode = *mode;
    r.consensus = j.at("consensus").get<LabelVector>();
    r.centroid_index = j.at("centroid_index").get<std::size_t>();
    r.centroid_worker = j.at("centroid_worker").get<std::string>();
    r.centroid_k = j.at("centroid_k").get<Label>();
    for (const auto& s : j.at("solutions"))
      r.solutions.push_back({s.at("worker_id").get<std::string>(), s.at("ari").get<double>(),
                             s.at("rand").get<double>()});
    r.mean_ari = j.at("mean_ari").get<double>();
    r.mean_rand = j.at("mean_rand").get<double>();
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      r.truth = TruthScore{t.at("labels").get<LabelVector>(), t.at("ari").get<double>(),
                           t.at("rand").get<double>()};
    }
    if (!is_canonical(r.consensus) || r.consensus.empty())
      throw Error(ErrorCode::ParseError, "report consensus is not a canonical partition");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string s(buf);
  if (s == "-0.0000") s = "0.0000";
  return s;
}

}  // namespace crowdens
