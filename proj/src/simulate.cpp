#include <crowdens/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace crowdens {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

WorkerStream::WorkerStream(std::uint64_t seed, std::uint64_t worker_index)
    : engine_(splitmix64(seed ^ splitmix64(worker_index))) {}

std::uint64_t WorkerStream::below(std::uint64_t bound) {
  constexpr std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % bound + 1) % bound;
  std::uint64_t draw = 0;
  do {
    draw = engine_();
  } while (draw > limit);
  return draw % bound;
}

double WorkerStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

void validate(const SimConfig& cfg) {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (cfg.truth.size() < 2)
    throw Error(ErrorCode::InvalidConfig, "truth must cover at least 2 objects");
  if (cfg.n_workers == 0) throw Error(ErrorCode::InvalidConfig, "need at least one worker");
  if (!in_unit(cfg.noise)) throw Error(ErrorCode::InvalidConfig, "noise must lie in [0, 1]");
  if (!in_unit(cfg.p_split)) throw Error(ErrorCode::InvalidConfig, "split must lie in [0, 1]");
  if (!in_unit(cfg.p_merge)) throw Error(ErrorCode::InvalidConfig, "merge must lie in [0, 1]");
  if (cfg.p_split + cfg.p_merge > 1.0)
    throw Error(ErrorCode::InvalidConfig, "split + merge probabilities exceed 1");
}

Partition round_robin_partition(std::size_t objects, std::size_t clusters) {
  if (clusters == 0 || clusters > objects)
    throw Error(ErrorCode::InvalidConfig, "need 1 <= clusters <= objects, got " +
                                              std::to_string(clusters) + " clusters for " +
                                              std::to_string(objects) + " objects");
  LabelVector labels(objects);
  for (std::size_t i = 0; i < objects; ++i) labels[i] = static_cast<Label>(i % clusters + 1);
  return Partition::from_canonical(std::move(labels));
}

Partition perturb(const Partition& truth, const SimConfig& cfg, std::size_t worker_index) {
  validate(cfg);
  WorkerStream rng(cfg.seed, worker_index);
  LabelVector labels = truth.label_vector();
  Label k = truth.k();

  const double structural = rng.uniform();
  if (structural < cfg.p_merge) {
    if (k >= 2) {
      const auto first = static_cast<Label>(rng.below(static_cast<std::uint64_t>(k)) + 1);
      auto second = static_cast<Label>(rng.below(static_cast<std::uint64_t>(k - 1)) + 1);
      if (second >= first) ++second;
      for (Label& l : labels)
        if (l == second) l = first;
    }
  } else if (structural < cfg.p_merge + cfg.p_split) {
    const std::vector<Count> sizes = cluster_sizes(truth);
    std::vector<Label> splittable;
    for (std::size_t j = 0; j < sizes.size(); ++j)
      if (sizes[j] >= 2) splittable.push_back(static_cast<Label>(j + 1));
    if (!splittable.empty()) {
      const Label target = splittable[rng.below(splittable.size())];
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == target) members.push_back(i);
      for (std::size_t i = members.size() - 1; i > 0; --i)
        std::swap(members[i], members[rng.below(i + 1)]);
      const std::size_t cut = 1 + rng.below(members.size() - 1);
      ++k;
      for (std::size_t i = cut; i < members.size(); ++i) labels[members[i]] = k;
    }
  }

  // After a merge one label value is unused; draw from the labels in use.
  std::vector<Label> in_use(labels.begin(), labels.end());
  std::sort(in_use.begin(), in_use.end());
  in_use.erase(std::unique(in_use.begin(), in_use.end()), in_use.end());
  for (Label& l : labels)
    if (rng.bernoulli(cfg.noise)) l = in_use[rng.below(in_use.size())];

  return canonicalize(std::span<const Label>(labels));
}

Ensemble generate_ensemble(const SimConfig& cfg) {
  validate(cfg);
  std::vector<Partition> solutions;
  solutions.reserve(cfg.n_workers);
  for (std::size_t w = 0; w < cfg.n_workers; ++w) solutions.push_back(perturb(cfg.truth, cfg, w));
  return Ensemble(std::move(solutions));
}

}  // namespace crowdens
