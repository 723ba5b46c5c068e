#include <crowdens/partition.hpp>

#include <limits>
#include <string>
#include <unordered_map>

namespace crowdens {

Partition Partition::from_canonical(LabelVector labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptyInput, "partition has no objects");
  if (!is_canonical(labels))
    throw Error(ErrorCode::NotCanonical, "labels are not in first-occurrence canonical form");
  Label k = 0;
  for (Label l : labels) k = std::max(k, l);
  return Partition(std::move(labels), k);
}

Partition canonicalize(std::span<const std::int64_t> raw) {
  if (raw.empty()) throw Error(ErrorCode::EmptyInput, "label vector is empty");
  std::unordered_map<std::int64_t, Label> relabel;
  LabelVector out;
  out.reserve(raw.size());
  Label next = 1;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int64_t v = raw[i];
    if (v <= 0)
      throw Error(ErrorCode::NonPositiveLabel,
                  "label " + std::to_string(v) + " at position " + std::to_string(i + 1) +
                      " is not a positive integer");
    auto [it, inserted] = relabel.try_emplace(v, next);
    if (inserted) ++next;
    out.push_back(it->second);
  }
  return Partition(std::move(out), next - 1);
}

Partition canonicalize(std::span<const Label> raw) {
  std::vector<std::int64_t> wide(raw.begin(), raw.end());
  return canonicalize(std::span<const std::int64_t>(wide));
}

Partition canonicalize(std::initializer_list<std::int64_t> raw) {
  return canonicalize(std::span<const std::int64_t>(raw.begin(), raw.size()));
}

bool is_canonical(std::span<const Label> labels) noexcept {
  Label seen = 0;
  for (Label l : labels) {
    if (l < 1 || l > seen + 1) return false;
    if (l == seen + 1) ++seen;
  }
  return true;
}

std::vector<Count> cluster_sizes(const Partition& x) {
  std::vector<Count> sizes(static_cast<std::size_t>(x.k()), 0);
  for (Label l : x.labels()) ++sizes[static_cast<std::size_t>(l - 1)];
  return sizes;
}

ContingencyTable contingency_table(const Partition& x, const Partition& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::LengthMismatch, "partitions cover " + std::to_string(x.size()) +
                                               " and " + std::to_string(y.size()) + " objects");
  ContingencyTable t;
  t.counts = CountMatrix::Zero(x.k(), y.k());
  for (std::size_t i = 0; i < x.size(); ++i) ++t.counts(x[i] - 1, y[i] - 1);
  t.row_sums = t.counts.rowwise().sum();
  t.col_sums = t.counts.colwise().sum().transpose();
  t.total = static_cast<Count>(x.size());
  return t;
}

Ensemble::Ensemble(std::vector<Partition> solutions) : solutions_(std::move(solutions)) {
  if (solutions_.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no solutions");
  object_count_ = solutions_.front().size();
  for (std::size_t i = 1; i < solutions_.size(); ++i) {
    if (solutions_[i].size() != object_count_)
      throw Error(ErrorCode::LengthMismatch,
                  "solution " + std::to_string(i + 1) + " covers " +
                      std::to_string(solutions_[i].size()) + " objects, expected " +
                      std::to_string(object_count_));
  }
}

}  // namespace crowdens
