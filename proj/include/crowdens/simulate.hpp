#pragma once

#include <crowdens/partition.hpp>

#include <cstddef>
#include <cstdint>
#include <random>

namespace crowdens {

/// Structured noise model for synthetic crowd ensembles.
///
/// Each worker first applies at most one structural edit to the truth: a
/// merge of two distinct clusters with probability `p_merge`, otherwise a
/// split with probability `p_split / (1 - p_merge)`. A split picks a cluster
/// of size >= 2 uniformly, shuffles its members uniformly and cuts at a
/// uniform position in 1..size-1. Then every object is independently moved,
/// with probability `noise`, to a uniformly chosen existing cluster (which
/// may be its own). The result is canonicalized.
struct SimConfig {
  Partition truth;
  std::size_t n_workers = 1;
  double noise = 0.0;
  double p_split = 0.0;
  double p_merge = 0.0;
  std::uint64_t seed = 0;
};

/// Throws InvalidConfig.
void validate(const SimConfig& cfg);

/// Balanced k-partition of p objects, object i in cluster (i mod k) + 1.
Partition round_robin_partition(std::size_t objects, std::size_t clusters);

/// Per-worker random stream. Worker i is seeded with
/// splitmix64(seed ^ splitmix64(i)) and draws from std::mt19937_64, whose
/// output sequence is fixed by the C++ standard. Bounded integers use
/// rejection sampling and reals take the top 53 bits, so streams are
/// identical on every platform and independent of generation order.
class WorkerStream {
 public:
  WorkerStream(std::uint64_t seed, std::uint64_t worker_index);

  /// Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Uniform in [0, 1).
  double uniform();
  bool bernoulli(double probability) { return uniform() < probability; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

Partition perturb(const Partition& truth, const SimConfig& cfg, std::size_t worker_index);

Ensemble generate_ensemble(const SimConfig& cfg);

}  // namespace crowdens
