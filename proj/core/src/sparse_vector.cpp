#include "ccws/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccws/errors.hpp"

namespace ccws {

SparseVector::SparseVector(std::uint64_t dimensionality, std::vector<Dim> dims,
                           std::vector<double> weights)
    : d_(dimensionality), dims_(std::move(dims)), weights_(std::move(weights)) {
  if (dims_.size() != weights_.size()) {
    throw InvalidArgumentError("sparse vector: dims and weights differ in length");
  }
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (dims_[k] >= d_) {
      throw InvalidArgumentError("sparse vector: dimension " + std::to_string(dims_[k]) +
                                 " out of range for d=" + std::to_string(d_));
    }
    if (k > 0 && dims_[k] <= dims_[k - 1]) {
      throw InvalidArgumentError("sparse vector: dimensions not strictly ascending");
    }
    if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw InvalidArgumentError("sparse vector: weights must be positive and finite");
    }
  }
}

SparseVector SparseVector::from_pairs(std::uint64_t dimensionality,
                                      const std::vector<std::pair<Dim, double>>& entries) {
  std::vector<Dim> dims;
  std::vector<double> weights;
  dims.reserve(entries.size());
  weights.reserve(entries.size());
  for (const auto& [dim, w] : entries) {
    dims.push_back(dim);
    weights.push_back(w);
  }
  return SparseVector(dimensionality, std::move(dims), std::move(weights));
}

double SparseVector::weight_at(Dim dim) const noexcept {
  const auto it = std::lower_bound(dims_.begin(), dims_.end(), dim);
  if (it == dims_.end() || *it != dim) return 0.0;
  return weights_[static_cast<std::size_t>(it - dims_.begin())];
}

SignedVector SignedVector::from_dense(std::span<const double> dense) {
  SignedVector v;
  v.dimensionality = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      v.dims.push_back(static_cast<Dim>(i));
      v.values.push_back(dense[i]);
    }
  }
  v.validate();
  return v;
}

void SignedVector::validate() const {
  if (dims.size() != values.size()) {
    throw InvalidArgumentError("signed vector: dims and values differ in length");
  }
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] >= dimensionality || (k > 0 && dims[k] <= dims[k - 1])) {
      throw InvalidArgumentError("signed vector: bad dimension ordering or range");
    }
    if (!std::isfinite(values[k])) {
      throw InvalidArgumentError("signed vector: non-finite value");
    }
  }
}

SparseVector double_dimensions(const SignedVector& x) {
  x.validate();
  const std::uint64_t d = x.dimensionality;
  std::vector<std::pair<Dim, double>> positive;
  std::vector<std::pair<Dim, double>> negative;
  for (std::size_t k = 0; k < x.dims.size(); ++k) {
    const double v = x.values[k];
    if (v > 0.0) {
      positive.emplace_back(x.dims[k], v);
    } else if (v < 0.0) {
      negative.emplace_back(static_cast<Dim>(d + x.dims[k]), -v);
    }
  }
  // Negative parts live in [d, 2d), so concatenation stays ascending.
  positive.insert(positive.end(), negative.begin(), negative.end());
  return SparseVector::from_pairs(2 * d, positive);
}

SparseVector elementwise_power(const SparseVector& u, double p) {
  if (!(p > 0.0)) throw InvalidArgumentError("elementwise_power: p must be positive");
  std::vector<Dim> dims(u.dims().begin(), u.dims().end());
  std::vector<double> weights;
  weights.reserve(u.size());
  for (double w : u.weights()) weights.push_back(std::pow(w, p));
  return SparseVector(u.dimensionality(), std::move(dims), std::move(weights));
}

SparseVector apply_feature_importance(const SparseVector& u, std::span<const double> importance) {
  if (importance.size() < u.dimensionality()) {
    throw InvalidArgumentError("feature importance vector shorter than dimensionality");
  }
  std::vector<Dim> dims;
  std::vector<double> weights;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double factor = importance[u.dims()[k]];
    if (factor < 0.0 || !std::isfinite(factor)) {
      throw InvalidArgumentError("feature importance must be finite and >= 0");
    }
    if (factor == 0.0) continue;
    dims.push_back(u.dims()[k]);
    weights.push_back(u.weights()[k] * factor);
  }
  return SparseVector(u.dimensionality(), std::move(dims), std::move(weights));
}

}  // namespace ccws
