#include "ccws/kernels.hpp"

#include <cmath>

#include "ccws/errors.hpp"

namespace ccws {
namespace {

void check_pair(const SparseVector& x, const SparseVector& y) {
  if (x.dimensionality() != y.dimensionality()) {
    throw InvalidArgumentError("kernel: vectors have different dimensionality");
  }
  if (x.empty() && y.empty()) {
    throw UndefinedSimilarityError("kernel: similarity of two empty vectors is undefined");
  }
}

// Calls visit(min, max) for every dimension in the union of supports.
template <typename Visit>
void merge_union(const SparseVector& x, const SparseVector& y, Visit&& visit) {
  const auto xd = x.dims();
  const auto yd = y.dims();
  const auto xw = x.weights();
  const auto yw = y.weights();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xd.size() && j < yd.size()) {
    if (xd[i] == yd[j]) {
      const bool x_smaller = xw[i] < yw[j];
      visit(x_smaller ? xw[i] : yw[j], x_smaller ? yw[j] : xw[i]);
      ++i;
      ++j;
    } else if (xd[i] < yd[j]) {
      visit(0.0, xw[i++]);
    } else {
      visit(0.0, yw[j++]);
    }
  }
  for (; i < xd.size(); ++i) visit(0.0, xw[i]);
  for (; j < yd.size(); ++j) visit(0.0, yw[j]);
}

}  // namespace

double pgmm(const SparseVector& x, const SparseVector& y, double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgumentError("pgmm: p must be positive");
  check_pair(x, y);
  double num = 0.0;
  double den = 0.0;
  if (p == 1.0) {
    merge_union(x, y, [&](double lo, double hi) {
      num += lo;
      den += hi;
    });
  } else if (p == 2.0) {
    merge_union(x, y, [&](double lo, double hi) {
      num += lo * lo;
      den += hi * hi;
    });
  } else {
    merge_union(x, y, [&](double lo, double hi) {
      if (lo > 0.0) num += std::exp(p * std::log(lo));
      den += std::exp(p * std::log(hi));
    });
  }
  return num / den;
}

double weighted_jaccard(const SparseVector& x, const SparseVector& y) { return pgmm(x, y, 1.0); }

double binary_jaccard(const SparseVector& x, const SparseVector& y) {
  check_pair(x, y);
  std::size_t shared = 0;
  std::size_t total = 0;
  merge_union(x, y, [&](double lo, double) {
    ++total;
    if (lo > 0.0) ++shared;
  });
  return static_cast<double>(shared) / static_cast<double>(total);
}

}  // namespace ccws
