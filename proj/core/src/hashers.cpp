#include "ccws/hashers.hpp"

#include <algorithm>

#include "ccws/dataset.hpp"
#include "ccws/parallel.hpp"

namespace ccws {

using rng::Substream;

CwsDraws cws_draws(std::uint64_t sample_state, Dim dim) noexcept {
  const std::uint64_t dim_state = rng::dimension_prefix(sample_state, dim);
  const std::uint64_t r_state = rng::substream_prefix(dim_state, Substream::kCwsR);
  const std::uint64_t c_state = rng::substream_prefix(dim_state, Substream::kCwsC);
  const std::uint64_t b_state = rng::substream_prefix(dim_state, Substream::kCwsBeta);
  CwsDraws d;
  d.r = rng::gamma21_from(rng::to_open_unit(rng::word_at(r_state, 0)),
                          rng::to_open_unit(rng::word_at(r_state, 1)));
  d.log_c = std::log(rng::gamma21_from(rng::to_open_unit(rng::word_at(c_state, 0)),
                                       rng::to_open_unit(rng::word_at(c_state, 1))));
  d.beta = rng::to_open_unit(rng::word_at(b_state, 0));
  return d;
}

CwsSample cws_sample(const SparseVector& u, double p, std::uint64_t sample_seed,
                     std::uint64_t experiment_seed) {
  const std::uint64_t state = rng::sample_prefix(experiment_seed, sample_seed);
  return cws_sample_with(u, p, [state](Dim dim) { return cws_draws(state, dim); });
}

Dim cws_zero_bit(const SparseVector& u, double p, std::uint64_t sample_seed,
                 std::uint64_t experiment_seed) {
  return cws_sample(u, p, sample_seed, experiment_seed).istar;
}

std::uint64_t permutation_word(std::uint64_t sample_state, Dim dim) noexcept {
  return rng::word_at(
      rng::substream_prefix(rng::dimension_prefix(sample_state, dim), Substream::kPermutation), 0);
}

std::uint64_t minhash(const SparseVector& u, std::uint64_t sample_seed,
                      std::uint64_t experiment_seed) {
  if (u.empty()) throw UndefinedHashError("minhash: vector has empty support");
  const std::uint64_t state = rng::sample_prefix(experiment_seed, sample_seed);
  std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
  for (Dim dim : u.dims()) best = std::min(best, permutation_word(state, dim));
  return best;
}

double projection_coefficient(std::uint64_t sample_state, Dim dim) noexcept {
  const std::uint64_t g_state =
      rng::substream_prefix(rng::dimension_prefix(sample_state, dim), Substream::kProjection);
  return rng::gaussian_from(rng::to_open_unit(rng::word_at(g_state, 0)),
                            rng::to_open_unit(rng::word_at(g_state, 1)));
}

namespace {

bool signrp_raw(std::span<const Dim> dims, std::span<const double> values,
                std::uint64_t sample_seed, std::uint64_t experiment_seed) {
  if (dims.empty()) throw UndefinedHashError("signrp: vector has empty support");
  const std::uint64_t state = rng::sample_prefix(experiment_seed, sample_seed);
  double dot = 0.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    dot += values[k] * projection_coefficient(state, dims[k]);
  }
  return dot >= 0.0;
}

}  // namespace

bool signrp(const SparseVector& u, std::uint64_t sample_seed, std::uint64_t experiment_seed) {
  return signrp_raw(u.dims(), u.weights(), sample_seed, experiment_seed);
}

bool signrp(const SignedVector& u, std::uint64_t sample_seed, std::uint64_t experiment_seed) {
  u.validate();
  return signrp_raw(u.dims, u.values, sample_seed, experiment_seed);
}

std::string to_string(HashFamily family) {
  switch (family) {
    case HashFamily::kCws: return "cws";
    case HashFamily::kMinHash: return "minhash";
    case HashFamily::kSignRp: return "signrp";
  }
  return "unknown";
}

HashFamily parse_hash_family(const std::string& name) {
  if (name == "cws") return HashFamily::kCws;
  if (name == "minhash") return HashFamily::kMinHash;
  if (name == "signrp") return HashFamily::kSignRp;
  throw ConfigError("unknown hash family '" + name + "'");
}

std::uint64_t hash_word(const SparseVector& u, const HashMethod& method,
                        std::uint64_t sample_seed, std::uint64_t experiment_seed) {
  switch (method.family) {
    case HashFamily::kCws: {
      const CwsSample s = cws_sample(u, method.p, sample_seed, experiment_seed);
      return method.cws_bits == CwsBits::kFull ? pack_cws(s) : s.istar;
    }
    case HashFamily::kMinHash:
      return minhash(u, sample_seed, experiment_seed);
    case HashFamily::kSignRp:
      return signrp(u, sample_seed, experiment_seed) ? 1 : 0;
  }
  throw InvalidArgumentError("hash_word: unknown family");
}

HashVector hash_vector(const SparseVector& u, const HashMethod& method, std::size_t m,
                       std::uint64_t experiment_seed) {
  if (m == 0) throw InvalidArgumentError("hash_vector: m must be >= 1");
  HashVector hv;
  hv.values.reserve(m);
  for (std::size_t k = 0; k < m; ++k) hv.values.push_back(hash_word(u, method, k, experiment_seed));
  return hv;
}

namespace {

// Above this dimensionality the per-chunk memo would cost more memory than
// it saves; draws are recomputed instead.
constexpr std::uint64_t kMaxMemoDimensionality = std::uint64_t{1} << 24;

void hash_rows_memo(const Dataset& dataset, const HashMethod& method, std::size_t m,
                    std::uint64_t experiment_seed, std::size_t begin, std::size_t end,
                    std::uint64_t* out) {
  const std::uint64_t d = dataset.dimensionality();
  switch (method.family) {
    case HashFamily::kCws: {
      DimMemo<CwsDraws> memo(d);
      for (std::size_t k = 0; k < m; ++k) {
        const std::uint64_t state = rng::sample_prefix(experiment_seed, k);
        for (std::size_t i = begin; i < end; ++i) {
          const SparseVector& u = dataset[i].vector;
          const CwsSample s = cws_sample_with(u, method.p, [&](Dim dim) {
            return memo.get(state, dim, cws_draws);
          });
          out[i * m + k] = method.cws_bits == CwsBits::kFull ? pack_cws(s) : s.istar;
        }
      }
      break;
    }
    case HashFamily::kMinHash: {
      DimMemo<std::uint64_t> memo(d);
      for (std::size_t k = 0; k < m; ++k) {
        const std::uint64_t state = rng::sample_prefix(experiment_seed, k);
        for (std::size_t i = begin; i < end; ++i) {
          const SparseVector& u = dataset[i].vector;
          if (u.empty()) throw UndefinedHashError("minhash: user '" + dataset[i].id + "' is empty");
          std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
          for (Dim dim : u.dims()) best = std::min(best, memo.get(state, dim, permutation_word));
          out[i * m + k] = best;
        }
      }
      break;
    }
    case HashFamily::kSignRp: {
      DimMemo<double> memo(d);
      for (std::size_t k = 0; k < m; ++k) {
        const std::uint64_t state = rng::sample_prefix(experiment_seed, k);
        for (std::size_t i = begin; i < end; ++i) {
          const SparseVector& u = dataset[i].vector;
          if (u.empty()) throw UndefinedHashError("signrp: user '" + dataset[i].id + "' is empty");
          double dot = 0.0;
          const auto dims = u.dims();
          const auto weights = u.weights();
          for (std::size_t j = 0; j < dims.size(); ++j) {
            dot += weights[j] * memo.get(state, dims[j], projection_coefficient);
          }
          out[i * m + k] = dot >= 0.0 ? 1 : 0;
        }
      }
      break;
    }
  }
}

}  // namespace

HashMatrix hash_dataset(const Dataset& dataset, const HashMethod& method, std::size_t m,
                        std::uint64_t experiment_seed) {
  if (m == 0) throw InvalidArgumentError("hash_dataset: m must be >= 1");
  HashMatrix matrix;
  matrix.rows = dataset.size();
  matrix.cols = m;
  matrix.words.assign(matrix.rows * m, 0);
  const bool use_memo = dataset.dimensionality() <= kMaxMemoDimensionality;
  parallel_for(dataset.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    if (use_memo) {
      hash_rows_memo(dataset, method, m, experiment_seed, begin, end, matrix.words.data());
      return;
    }
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < m; ++k) {
        matrix.words[i * m + k] = hash_word(dataset[i].vector, method, k, experiment_seed);
      }
    }
  });
  return matrix;
}

}  // namespace ccws
