#include <crowdens/consensus.hpp>

#include <string>

namespace crowdens {

std::string_view to_string(FusionMode mode) noexcept {
  return mode == FusionMode::Medoid ? "medoid" : "vote";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view text) noexcept {
  if (text == "medoid") return FusionMode::Medoid;
  if (text == "vote") return FusionMode::Vote;
  return std::nullopt;
}

std::size_t select_medoid(const SimilarityMatrix& sim, const Ensemble& e) {
  if (e.size() == 0) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no solutions");
  std::size_t best = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    const double score = sim.aggregated(static_cast<Eigen::Index>(i));
    const double top = sim.aggregated(static_cast<Eigen::Index>(best));
    if (score > top || (score == top && e[i].k() < e[best].k())) best = i;
  }
  return best;
}

CorrespondenceMatrix correspondence(const Partition& source, const Partition& centroid) {
  CorrespondenceMatrix cm;
  cm.counts = contingency_table(source, centroid).counts;
  const Eigen::VectorXd row_totals = cm.counts.cast<double>().rowwise().sum();
  cm.row_probabilities = cm.counts.cast<double>().array().colwise() / row_totals.array();

  cm.mapping.resize(static_cast<std::size_t>(cm.counts.rows()));
  for (Eigen::Index r = 0; r < cm.counts.rows(); ++r) {
    // Integer counts share the row's denominator, so the argmax is taken on
    // counts to keep ties exact. maxCoeff reports the first maximum.
    Eigen::Index col = 0;
    cm.counts.row(r).maxCoeff(&col);
    cm.mapping[static_cast<std::size_t>(r)] = static_cast<Label>(col + 1);
  }
  return cm;
}

LabelVector align(const Partition& source, const Partition& centroid) {
  const CorrespondenceMatrix cm = correspondence(source, centroid);
  LabelVector out;
  out.reserve(source.size());
  for (Label l : source.labels()) out.push_back(cm.mapping[static_cast<std::size_t>(l - 1)]);
  return out;
}

Partition fuse(std::span<const LabelVector> aligned, const Partition& centroid, FusionMode mode) {
  if (aligned.empty()) throw Error(ErrorCode::EmptyEnsemble, "nothing to fuse");
  const std::size_t p = centroid.size();
  for (const LabelVector& v : aligned) {
    if (v.size() != p)
      throw Error(ErrorCode::LengthMismatch, "aligned vector covers " + std::to_string(v.size()) +
                                                 " objects, centroid covers " + std::to_string(p));
    for (Label l : v)
      if (l < 1 || l > centroid.k())
        throw Error(ErrorCode::InvalidConfig,
                    "aligned label " + std::to_string(l) + " is outside the centroid label space");
  }
  if (mode == FusionMode::Medoid) return centroid;

  const auto k = static_cast<std::size_t>(centroid.k());
  std::vector<Count> tally(k);
  LabelVector fused(p);
  for (std::size_t obj = 0; obj < p; ++obj) {
    std::fill(tally.begin(), tally.end(), 0);
    for (const LabelVector& v : aligned) ++tally[static_cast<std::size_t>(v[obj] - 1)];
    const Label own = centroid[obj];
    Label winner = own;
    for (std::size_t l = 0; l < k; ++l) {
      const Count votes = tally[l];
      const Count lead = tally[static_cast<std::size_t>(winner - 1)];
      if (votes > lead || (votes == lead && winner != own && static_cast<Label>(l + 1) < winner))
        winner = static_cast<Label>(l + 1);
    }
    fused[obj] = winner;
  }
  return canonicalize(std::span<const Label>(fused));
}

ConsensusResult consensus(const Ensemble& e, FusionMode mode) {
  if (e.size() == 0) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no solutions");
  SimilarityMatrix sim = similarity_matrix(e);
  const std::size_t centroid_index = select_medoid(sim, e);
  const Partition& centroid = e[centroid_index];

  std::vector<LabelVector> aligned;
  aligned.reserve(e.size());
  for (const Partition& s : e) aligned.push_back(align(s, centroid));

  Partition fused = fuse(aligned, centroid, mode);

  std::vector<double> per_solution;
  per_solution.reserve(e.size());
  double total = 0.0;
  for (const Partition& s : e) {
    per_solution.push_back(adjusted_rand_index(fused, s));
    total += per_solution.back();
  }
  const double mean = total / static_cast<double>(e.size());

  return ConsensusResult{std::move(fused),      centroid_index,          centroid.k(),
                         std::move(aligned),    std::move(sim),          std::move(per_solution),
                         mean};
}

}  // namespace crowdens
