#pragma once

#include "ccws/sparse_vector.hpp"

namespace ccws {

// Exact similarity kernels over non-negative sparse vectors, evaluated by a
// single merge over the union of supports. All throw
// UndefinedSimilarityError when both inputs are empty and
// InvalidArgumentError when dimensionalities differ.

/// sum_i min(x_i, y_i) / sum_i max(x_i, y_i)
double weighted_jaccard(const SparseVector& x, const SparseVector& y);

/// sum_i min(x_i, y_i)^p / sum_i max(x_i, y_i)^p, p > 0.
/// pgmm(x, y, 1.0) is bit-identical to weighted_jaccard(x, y).
double pgmm(const SparseVector& x, const SparseVector& y, double p);

/// |supp x ∩ supp y| / |supp x ∪ supp y|; weights ignored.
double binary_jaccard(const SparseVector& x, const SparseVector& y);

}  // namespace ccws
