#include <crowdens/metrics.hpp>
#include <crowdens/simulate.hpp>

#include <doctest.h>

#include <algorithm>

using namespace crowdens;

namespace {

SimConfig config(Partition truth, std::size_t workers, double noise, double split, double merge,
                 std::uint64_t seed) {
  return SimConfig{std::move(truth), workers, noise, split, merge, seed};
}

}  // namespace

TEST_CASE("splitmix64 reference values") {
  // First outputs of the reference SplitMix64 generator seeded with 0 are
  // splitmix64(0), splitmix64(0x9e3779b97f4a7c15), ...
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(splitmix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("round robin truth") {
  CHECK(round_robin_partition(9, 3).label_vector() == LabelVector{1, 2, 3, 1, 2, 3, 1, 2, 3});
  CHECK(round_robin_partition(4, 1).k() == 1);
  CHECK_THROWS_AS(round_robin_partition(3, 4), Error);
  CHECK_THROWS_AS(round_robin_partition(3, 0), Error);
}

TEST_CASE("config validation") {
  const Partition truth = round_robin_partition(6, 2);
  CHECK_NOTHROW(validate(config(truth, 3, 0.2, 0.5, 0.5, 1)));
  CHECK_THROWS_AS(validate(config(truth, 0, 0.0, 0.0, 0.0, 1)), Error);
  CHECK_THROWS_AS(validate(config(truth, 3, 1.5, 0.0, 0.0, 1)), Error);
  CHECK_THROWS_AS(validate(config(truth, 3, -0.1, 0.0, 0.0, 1)), Error);
  CHECK_THROWS_AS(validate(config(truth, 3, 0.0, 0.6, 0.5, 1)), Error);
  CHECK_THROWS_AS(validate(config(canonicalize({1}), 3, 0.0, 0.0, 0.0, 1)), Error);
  try {
    generate_ensemble(config(truth, 3, 0.0, 0.7, 0.7, 1));
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("noise-free workers reproduce the truth") {
  const Partition truth = canonicalize({1, 1, 2, 3, 3, 2, 1});
  const Ensemble e = generate_ensemble(config(truth, 10, 0.0, 0.0, 0.0, 99));
  for (const Partition& s : e) CHECK(s == truth);
  CHECK(generate_ensemble(config(truth, 1, 0.0, 0.0, 0.0, 5)) == Ensemble({truth}));

  const Partition one = canonicalize({1, 1, 1, 1, 1});
  for (const Partition& s : generate_ensemble(config(one, 10, 1.0, 0.0, 0.0, 3))) CHECK(s == one);
}

TEST_CASE("golden perturbation output") {
  const SimConfig cfg = config(canonicalize({1, 1, 2, 2}), 4, 0.5, 0.0, 0.0, 20261015);
  CHECK(perturb(cfg.truth, cfg, 0).label_vector() == LabelVector{1, 1, 1, 1});
  CHECK(perturb(cfg.truth, cfg, 1).label_vector() == LabelVector{1, 1, 1, 1});
  CHECK(perturb(cfg.truth, cfg, 2).label_vector() == LabelVector{1, 2, 1, 1});
  CHECK(perturb(cfg.truth, cfg, 3).label_vector() == LabelVector{1, 2, 2, 1});
}

TEST_CASE("generation is deterministic and order independent") {
  const SimConfig cfg = config(round_robin_partition(12, 3), 25, 0.2, 0.2, 0.2, 7);
  const Ensemble a = generate_ensemble(cfg);
  CHECK(a == generate_ensemble(cfg));
  for (std::size_t w = cfg.n_workers; w-- > 0;) CHECK(perturb(cfg.truth, cfg, w) == a[w]);
  SimConfig other = cfg;
  other.seed = 8;
  CHECK_FALSE(a == generate_ensemble(other));
}

TEST_CASE("splits produce variable cluster counts") {
  const SimConfig cfg = config(round_robin_partition(9, 3), 50, 0.0, 0.5, 0.0, 13);
  const Ensemble e = generate_ensemble(cfg);
  const auto changed = std::count_if(e.begin(), e.end(), [](const Partition& s) { return s.k() != 3; });
  CHECK(changed > 0);
  for (const Partition& s : e) CHECK((s.k() == 3 || s.k() == 4));
}

TEST_CASE("merges reduce cluster count by one") {
  const SimConfig cfg = config(round_robin_partition(9, 3), 30, 0.0, 0.0, 1.0, 17);
  for (const Partition& s : generate_ensemble(cfg)) CHECK(s.k() == 2);
  // A single cluster has nothing to merge with.
  const SimConfig single = config(canonicalize({1, 1, 1}), 5, 0.0, 0.0, 1.0, 17);
  for (const Partition& s : generate_ensemble(single)) CHECK(s.k() == 1);
}

TEST_CASE("split needs a cluster of size two") {
  const Partition singletons = canonicalize({1, 2, 3, 4});
  for (const Partition& s : generate_ensemble(config(singletons, 10, 0.0, 1.0, 0.0, 2))) CHECK(s == singletons);
}

TEST_CASE("agreement with truth falls as noise grows") {
  const Partition truth = round_robin_partition(30, 3);
  const double levels[] = {0.0, 0.1, 0.3, 0.5};
  int violations = 0;
  int comparisons = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    double previous = 2.0;
    for (double eps : levels) {
      const Ensemble e = generate_ensemble(config(truth, 20, eps, 0.0, 0.0, seed));
      const double mean = average_similarity(truth, e, Metric::Ari);
      if (previous <= 1.5) {
        ++comparisons;
        if (mean > previous) ++violations;
      }
      previous = mean;
    }
  }
  CHECK(comparisons == 300);
  CHECK(violations <= 15);
}
