#pragma once

// Hash families over sparse non-negative vectors: p-powered consistent
// weighted sampling (CWS), MinHash and sign random projections (SignRP).
//
// All random quantities come from ccws::rng keyed by
// (experiment_seed, sample_seed, dimension), so the draws for a dimension
// are shared by every vector hashed with the same seeds. Per-sample cost is
// O(|support|); no O(d) state is touched.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccws/errors.hpp"
#include "ccws/keyed_rng.hpp"
#include "ccws/sparse_vector.hpp"

namespace ccws {

class Dataset;

struct CwsSample {
  Dim istar = 0;
  std::int64_t tstar = 0;

  friend bool operator==(const CwsSample&, const CwsSample&) = default;
};

/// The per-dimension random triple of one CWS sample: r ~ Gamma(2,1),
/// ln c with c ~ Gamma(2,1), beta ~ Uniform(0,1).
struct CwsDraws {
  double r = 0.0;
  double log_c = 0.0;
  double beta = 0.0;
};

/// Draws for `dim` under a sample whose prefix is
/// rng::sample_prefix(experiment_seed, sample_seed).
CwsDraws cws_draws(std::uint64_t sample_state, Dim dim) noexcept;

/// Running argmin over dimensions visited in ascending order. Ties on a_i
/// keep the earlier (smaller) dimension.
class CwsArgmin {
 public:
  void visit(Dim dim, double scaled_log_weight, const CwsDraws& d) noexcept {
    const double t = std::floor(scaled_log_weight / d.r + d.beta);
    const double a = d.log_c - d.r * (t + 1.0 - d.beta);
    if (a < best_a_) {
      best_a_ = a;
      best_.istar = dim;
      best_.tstar = static_cast<std::int64_t>(t);
    }
  }
  const CwsSample& result() const noexcept { return best_; }

 private:
  double best_a_ = std::numeric_limits<double>::infinity();
  CwsSample best_;
};

/// CWS of `u` using an arbitrary draw source `draws(dim) -> CwsDraws`.
/// Exposed so tests can observe exactly which dimensions are drawn.
template <typename DrawSource>
CwsSample cws_sample_with(const SparseVector& u, double p, DrawSource&& draws) {
  if (u.empty()) throw UndefinedHashError("cws: vector has empty support");
  if (!(p > 0.0) || !std::isfinite(p)) throw InvalidArgumentError("cws: p must be positive");
  CwsArgmin argmin;
  const auto dims = u.dims();
  const auto weights = u.weights();
  for (std::size_t k = 0; k < dims.size(); ++k) {
    argmin.visit(dims[k], p * std::log(weights[k]), draws(dims[k]));
  }
  return argmin.result();
}

/// One CWS hash sample (i*, t*) of u for the pGMM kernel with power p.
CwsSample cws_sample(const SparseVector& u, double p, std::uint64_t sample_seed,
                     std::uint64_t experiment_seed);

/// 0-bit CWS: the sampled dimension i* only.
Dim cws_zero_bit(const SparseVector& u, double p, std::uint64_t sample_seed,
                 std::uint64_t experiment_seed);

/// Keyed 64-bit value of dimension `dim` standing in for a random permutation.
std::uint64_t permutation_word(std::uint64_t sample_state, Dim dim) noexcept;

/// min over supp(u) of the keyed permutation word; weights ignored.
std::uint64_t minhash(const SparseVector& u, std::uint64_t sample_seed,
                      std::uint64_t experiment_seed);

/// Gaussian projection coefficient for `dim`.
double projection_coefficient(std::uint64_t sample_state, Dim dim) noexcept;

/// Sign bit of sum_i u_i g_i with g_i ~ N(0,1) keyed per dimension;
/// 1 for a non-negative projection, 0 otherwise.
bool signrp(const SparseVector& u, std::uint64_t sample_seed, std::uint64_t experiment_seed);
bool signrp(const SignedVector& u, std::uint64_t sample_seed, std::uint64_t experiment_seed);

enum class HashFamily { kCws, kMinHash, kSignRp };

/// kZero folds i* only into the hash word; kFull packs (i*, t*).
enum class CwsBits { kZero, kFull };

struct HashMethod {
  HashFamily family = HashFamily::kCws;
  double p = 1.0;
  CwsBits cws_bits = CwsBits::kZero;
};

std::string to_string(HashFamily family);
HashFamily parse_hash_family(const std::string& name);

/// The method's single-sample hash folded into a 64-bit word.
std::uint64_t hash_word(const SparseVector& u, const HashMethod& method,
                        std::uint64_t sample_seed, std::uint64_t experiment_seed);

/// Packs (i*, t*) exactly; t* is truncated to its low 32 bits.
constexpr std::uint64_t pack_cws(const CwsSample& s) noexcept {
  return (static_cast<std::uint64_t>(s.istar) << 32) |
         static_cast<std::uint32_t>(static_cast<std::int32_t>(s.tstar));
}

/// m hash words; element k uses sample_seed = k.
struct HashVector {
  std::vector<std::uint64_t> values;

  friend bool operator==(const HashVector&, const HashVector&) = default;
  friend auto operator<=>(const HashVector&, const HashVector&) = default;
};

HashVector hash_vector(const SparseVector& u, const HashMethod& method, std::size_t m,
                       std::uint64_t experiment_seed);

/// Row-major n x m matrix of hash words for every user of a dataset.
/// Row i equals hash_vector(dataset[i].vector, ...).values.
struct HashMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint64_t> words;

  std::span<const std::uint64_t> row(std::size_t i) const {
    return std::span<const std::uint64_t>(words).subspan(i * cols, cols);
  }
};

HashMatrix hash_dataset(const Dataset& dataset, const HashMethod& method, std::size_t m,
                        std::uint64_t experiment_seed);

/// Memo of per-dimension draws for one sample at a time, sized to the
/// dimensionality. Bulk paths use it to share draws among the many users of a
/// cohort; results are identical to recomputing the draws.
template <typename Value>
class DimMemo {
 public:
  explicit DimMemo(std::uint64_t dimensionality)
      : tags_(dimensionality, 0), values_(dimensionality) {}

  template <typename Compute>
  const Value& get(std::uint64_t sample_state, Dim dim, Compute&& compute) {
    if (tags_[dim] != sample_state || sample_state == 0) {
      values_[dim] = compute(sample_state, dim);
      tags_[dim] = sample_state;
    }
    return values_[dim];
  }

 private:
  std::vector<std::uint64_t> tags_;
  std::vector<Value> values_;
};

}  // namespace ccws
