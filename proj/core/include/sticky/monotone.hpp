#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sticky {

/// Half-open index range [begin, end).
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  bool contains(const IndexRange& r) const noexcept { return r.begin >= begin && r.end <= end; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Values on a grid of cells with positive weights.
struct WeightedSequence {
  std::vector<double> weights;
  std::vector<double> values;

  WeightedSequence() = default;
  /// Throws InvalidArgument on length mismatch or nonpositive weights.
  WeightedSequence(std::vector<double> w, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double total_weight() const noexcept;
  double weighted_mean() const noexcept;
};

/// Continuous piecewise-linear function given by its nodes.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  /// Nodes must be strictly increasing and match values in length.
  PiecewiseLinear(std::vector<double> nodes, std::vector<double> values);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  double operator()(double m) const;
  /// Slope on [nodes[i], nodes[i+1]].
  double slope(std::size_t i) const;
  std::vector<double> slopes() const;
  /// Nondecreasing chord slopes up to `tol`.
  bool is_convex(double tol = 0.0) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Weighted isotonic regression by pool-adjacent-violators.
/// Adjacent blocks are pooled while left mean >= right mean.
std::vector<double> pava(std::span<const double> weights, std::span<const double> values);

/// Blocks pooled by pava, as half-open index ranges.
std::vector<IndexRange> pava_blocks(std::span<const double> weights, std::span<const double> values);

WeightedSequence project_monotone(const WeightedSequence& ws);

/// Indices of the lower hull vertices (monotone chain, strict turns).
/// A node is dropped when it lies no more than `tol` below the chord of its
/// neighbours.
std::vector<std::size_t> lower_convex_hull(const PiecewiseLinear& pl, double tol = 0.0);

/// Greatest convex minorant, evaluated on the input node grid.
PiecewiseLinear lower_convex_envelope(const PiecewiseLinear& pl, double tol = 0.0);

/// Cumulative primitive F(theta_k) = sum_{i<k} w_i v_i on the nodes theta_k.
PiecewiseLinear cumulative_primitive(const WeightedSequence& ws);

/// Throws MalformedPartition unless blocks are nonempty, ordered, disjoint
/// and within [0, n).
void validate_partition(std::span<const IndexRange> blocks, std::size_t n);

/// Block-wise weighted means; values outside blocks are kept.
WeightedSequence project_subspace_HX(const WeightedSequence& ws, std::span<const IndexRange> blocks);

/// Block-wise isotonic regression; values outside blocks are kept.
WeightedSequence project_tangent_cone(const WeightedSequence& ws, std::span<const IndexRange> blocks);

}  // namespace sticky
