#pragma once

#include <crowdens/consensus.hpp>
#include <crowdens/partition.hpp>

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdens {

// Solutions file, one response per row:
//
//   solutions-v1,object_1,object_2,...,object_p
//   <worker_id>,<label_1>,...,<label_p>
//
// The first header cell is the format version. Labels are stored in
// canonical form; readers canonicalize whatever positive labels they find.
inline constexpr std::string_view kSolutionsVersion = "solutions-v1";

struct SolutionsFile {
  std::size_t object_count = 0;
  std::vector<std::string> worker_ids;
  std::vector<Partition> solutions;

  /// Throws EmptyEnsemble for a header-only file.
  Ensemble ensemble() const;
  friend bool operator==(const SolutionsFile&, const SolutionsFile&) = default;
};

/// Non-empty, no commas or line breaks, no surrounding whitespace.
bool is_valid_worker_id(std::string_view id) noexcept;

/// Throws ParseError, RaggedRows, NonIntegerLabel or NonPositiveLabel; the
/// message names the line and column.
SolutionsFile read_solutions(std::istream& in);
SolutionsFile parse_solutions(std::string_view text);

/// Throws ParseError for an invalid worker id.
void write_solutions(std::ostream& out, const SolutionsFile& file);
std::string format_solutions(const SolutionsFile& file);

SolutionsFile make_solutions_file(const Ensemble& e, std::vector<std::string> worker_ids);

struct SolutionScore {
  std::string worker_id;
  double ari = 0.0;
  double rand = 0.0;
  friend bool operator==(const SolutionScore&, const SolutionScore&) = default;
};

struct TruthScore {
  LabelVector labels;
  double ari = 0.0;
  double rand = 0.0;
  friend bool operator==(const TruthScore&, const TruthScore&) = default;
};

/// Consensus vs every input, plus an optional expert partition.
struct EvaluationReport {
  FusionMode mode = FusionMode::Vote;
  LabelVector consensus;
  std::size_t centroid_index = 0;
  std::string centroid_worker;
  Label centroid_k = 0;
  std::vector<SolutionScore> solutions;
  double mean_ari = 0.0;
  double mean_rand = 0.0;
  std::optional<TruthScore> truth;
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

EvaluationReport make_report(const SolutionsFile& file, const ConsensusResult& result,
                             FusionMode mode, const std::optional<Partition>& truth = {});

nlohmann::json report_to_json(const EvaluationReport& report);
/// Throws ParseError.
EvaluationReport report_from_json(const nlohmann::json& j);

/// Fixed 4-decimal rendering; negative zero prints as 0.0000.
std::string format_score(double value);

}  // namespace crowdens
