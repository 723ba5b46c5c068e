#pragma once

#include <crowdens/metrics.hpp>
#include <crowdens/partition.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace crowdens {

enum class FusionMode { Medoid, Vote };

std::string_view to_string(FusionMode mode) noexcept;
std::optional<FusionMode> parse_fusion_mode(std::string_view text) noexcept;

/// Source-label x centroid-label co-occurrence with its row-normalized form
/// and the per-row argmax mapping (smallest centroid label on ties).
struct CorrespondenceMatrix {
  CountMatrix counts;
  Eigen::MatrixXd row_probabilities;
  LabelVector mapping;  // mapping[l-1] is the centroid label for source label l
};

struct ConsensusResult {
  Partition consensus;
  std::size_t centroid_index = 0;
  Label centroid_k = 0;
  std::vector<LabelVector> aligned;
  SimilarityMatrix similarity;
  std::vector<double> per_solution_ari;  // consensus vs each input
  double mean_ari = 0.0;
};

/// Index maximizing the aggregated ARI. Ties go to the smaller cluster
/// count, then to the lower index.
std::size_t select_medoid(const SimilarityMatrix& sim, const Ensemble& e);

CorrespondenceMatrix correspondence(const Partition& source, const Partition& centroid);

/// Rewrites `source` into the centroid's label space. The result is left in
/// centroid labels and is not canonicalized.
LabelVector align(const Partition& source, const Partition& centroid);

/// Medoid mode returns the centroid. Vote mode takes the per-object
/// plurality over `aligned`; ties go to the centroid's label for that
/// object when it is among the tied, else to the smallest tied label.
Partition fuse(std::span<const LabelVector> aligned, const Partition& centroid, FusionMode mode);

ConsensusResult consensus(const Ensemble& e, FusionMode mode);

}  // namespace crowdens
