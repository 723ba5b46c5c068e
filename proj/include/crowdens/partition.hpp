#pragma once

#include <crowdens/error.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace crowdens {

using Label = std::int32_t;
using LabelVector = std::vector<Label>;
using Count = std::int64_t;
using CountMatrix = Eigen::Matrix<Count, Eigen::Dynamic, Eigen::Dynamic>;
using CountVector = Eigen::Matrix<Count, Eigen::Dynamic, 1>;

/// A clustering solution over p objects in canonical form: labels are
/// exactly 1..k and label j+1 first appears after label j.
class Partition {
 public:
  /// Wraps labels that are already canonical; throws NotCanonical otherwise.
  static Partition from_canonical(LabelVector labels);

  std::span<const Label> labels() const noexcept { return labels_; }
  const LabelVector& label_vector() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  Label k() const noexcept { return k_; }
  Label operator[](std::size_t i) const { return labels_[i]; }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  Partition(LabelVector labels, Label k) : labels_(std::move(labels)), k_(k) {}

  LabelVector labels_;
  Label k_ = 0;

  friend Partition canonicalize(std::span<const std::int64_t> raw);
};

/// Relabels by first occurrence. Accepts any positive labels, including
/// non-contiguous ones.
Partition canonicalize(std::span<const std::int64_t> raw);
Partition canonicalize(std::span<const Label> raw);
Partition canonicalize(std::initializer_list<std::int64_t> raw);

bool is_canonical(std::span<const Label> labels) noexcept;

/// Size of cluster j at index j-1.
std::vector<Count> cluster_sizes(const Partition& x);

struct ContingencyTable {
  CountMatrix counts;    // k_x rows, k_y columns
  CountVector row_sums;  // a_i
  CountVector col_sums;  // b_j
  Count total = 0;
};

/// n_ij = |X_i ∩ Y_j|. Throws LengthMismatch.
ContingencyTable contingency_table(const Partition& x, const Partition& y);

/// Solutions over a shared object set; k may differ between members.
class Ensemble {
 public:
  Ensemble() = default;
  /// Throws EmptyEnsemble for no solutions, LengthMismatch for unequal p.
  explicit Ensemble(std::vector<Partition> solutions);

  std::size_t size() const noexcept { return solutions_.size(); }
  std::size_t object_count() const noexcept { return object_count_; }
  const Partition& operator[](std::size_t i) const { return solutions_[i]; }
  const std::vector<Partition>& solutions() const noexcept { return solutions_; }
  auto begin() const noexcept { return solutions_.begin(); }
  auto end() const noexcept { return solutions_.end(); }

  friend bool operator==(const Ensemble&, const Ensemble&) = default;

 private:
  std::vector<Partition> solutions_;
  std::size_t object_count_ = 0;
};

}  // namespace crowdens
