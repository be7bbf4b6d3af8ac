#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ccws {

using Dim = std::uint32_t;

/// Non-negative sparse vector: strictly ascending dimensions, every stored
/// weight positive and finite. Immutable after construction.
class SparseVector {
 public:
  SparseVector() = default;

  /// Throws InvalidArgumentError if the invariants do not hold.
  SparseVector(std::uint64_t dimensionality, std::vector<Dim> dims, std::vector<double> weights);

  static SparseVector from_pairs(std::uint64_t dimensionality,
                                 const std::vector<std::pair<Dim, double>>& entries);

  std::uint64_t dimensionality() const noexcept { return d_; }
  std::size_t size() const noexcept { return dims_.size(); }
  bool empty() const noexcept { return dims_.empty(); }

  std::span<const Dim> dims() const noexcept { return dims_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Weight at `dim`, 0 when absent.
  double weight_at(Dim dim) const noexcept;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::uint64_t d_ = 0;
  std::vector<Dim> dims_;
  std::vector<double> weights_;
};

/// Sparse vector whose entries may be negative (nonzero, finite, ascending).
/// Only used as input to double_dimensions() and to SignRP.
struct SignedVector {
  std::uint64_t dimensionality = 0;
  std::vector<Dim> dims;
  std::vector<double> values;

  /// Drops zeros; throws InvalidArgumentError on non-finite values or
  /// unsorted dimensions.
  static SignedVector from_dense(std::span<const double> dense);
  void validate() const;
};

/// Positive entry w at i -> (i, w); negative entry w at i -> (d + i, -w).
SparseVector double_dimensions(const SignedVector& x);

/// Element-wise u_i^p.
SparseVector elementwise_power(const SparseVector& u, double p);

/// Element-wise u_i * importance[u_i's dim]. Entries whose importance is 0
/// are dropped. `importance` must cover the dimensionality and be >= 0.
SparseVector apply_feature_importance(const SparseVector& u, std::span<const double> importance);

}  // namespace ccws
