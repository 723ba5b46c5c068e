#include <crowdens/metrics.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace crowdens {
namespace {

using Wide = __int128;

void require_comparable(const Partition& x, const Partition& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, "partitions cover " + std::to_string(x.size()) +
                                               " and " + std::to_string(y.size()) + " objects");
  if (x.size() < 2)
    throw Error(ErrorCode::TooFewObjects, "pair-based indices need at least 2 objects");
}

template <typename Derived>
Count sum_choose2(const Eigen::DenseBase<Derived>& m) {
  Count s = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += choose2(m(i, j));
  return s;
}

}  // namespace

PairCounts pair_counts(const Partition& x, const Partition& y) {
  require_comparable(x, y);
  const ContingencyTable t = contingency_table(x, y);
  const Count together_both = sum_choose2(t.counts);
  const Count together_x = sum_choose2(t.row_sums);
  const Count together_y = sum_choose2(t.col_sums);
  PairCounts pc;
  pc.a = together_both;
  pc.b = together_x - together_both;
  pc.c = together_y - together_both;
  pc.d = choose2(t.total) - pc.a - pc.b - pc.c;
  return pc;
}

double rand_index(const Partition& x, const Partition& y) {
  const PairCounts pc = pair_counts(x, y);
  return static_cast<double>(pc.a + pc.d) / static_cast<double>(pc.total());
}

double adjusted_rand_index(const Partition& x, const Partition& y) {
  require_comparable(x, y);
  const ContingencyTable t = contingency_table(x, y);
  const Wide index = sum_choose2(t.counts);
  const Wide rows = sum_choose2(t.row_sums);
  const Wide cols = sum_choose2(t.col_sums);
  const Wide pairs = choose2(t.total);

  // Both sides of the Hubert-Arabie ratio scaled by 2*C(p,2).
  const Wide numerator = 2 * pairs * index - 2 * rows * cols;
  const Wide denominator = pairs * (rows + cols) - 2 * rows * cols;
  if (denominator == 0) return x == y ? 1.0 : 0.0;
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(denominator));
}

SimilarityMatrix similarity_matrix(const Ensemble& e) {
  const auto n = static_cast<Eigen::Index>(e.size());
  if (n == 0) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no solutions");
  if (e.object_count() < 2)
    throw Error(ErrorCode::TooFewObjects, "pair-based indices need at least 2 objects");

  SimilarityMatrix sim;
  sim.values = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      sim.values(i, j) = sim.values(j, i) = adjusted_rand_index(e[i], e[j]);

  // Summing each row in sorted order makes the sum a function of the
  // multiset of values, so rows of duplicate solutions tie exactly.
  sim.aggregated.resize(n);
  std::vector<double> row;
  for (Eigen::Index i = 0; i < n; ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) row.push_back(sim.values(i, j));
    std::sort(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += v;
    sim.aggregated(i) = s;
  }
  return sim;
}

double average_similarity(const Partition& reference, const Ensemble& e, Metric metric) {
  if (e.size() == 0) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no solutions");
  double s = 0.0;
  for (const Partition& member : e)
    s += metric == Metric::Ari ? adjusted_rand_index(reference, member)
                               : rand_index(reference, member);
  return s / static_cast<double>(e.size());
}

}  // namespace crowdens
