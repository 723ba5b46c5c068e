#pragma once

#include <crowdens/partition.hpp>

#include <Eigen/Dense>

namespace crowdens {

/// Classification of the C(p,2) unordered object pairs.
/// a: together in both, b: together in x only, c: together in y only,
/// d: apart in both.
struct PairCounts {
  Count a = 0;
  Count b = 0;
  Count c = 0;
  Count d = 0;

  Count total() const noexcept { return a + b + c + d; }
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

/// Pairwise ARI over an ensemble. `aggregated[i]` is the row sum without
/// the diagonal.
struct SimilarityMatrix {
  Eigen::MatrixXd values;
  Eigen::VectorXd aggregated;
};

enum class Metric { Rand, Ari };

/// n choose 2, exact.
constexpr Count choose2(Count n) noexcept { return n * (n - 1) / 2; }

PairCounts pair_counts(const Partition& x, const Partition& y);
double rand_index(const Partition& x, const Partition& y);

/// Hubert-Arabie adjusted Rand index from the contingency table. All
/// combinatorial sums are exact 128-bit integers; one division at the end.
/// When the chance-corrected denominator vanishes (both all-singletons or
/// both one cluster) the result is 1 for equal partitions and 0 otherwise.
double adjusted_rand_index(const Partition& x, const Partition& y);

SimilarityMatrix similarity_matrix(const Ensemble& e);

double average_similarity(const Partition& reference, const Ensemble& e, Metric metric);

}  // namespace crowdens
