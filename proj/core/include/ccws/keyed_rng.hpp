#pragma once

// Counter-based keyed random streams.
//
// Every output word is a pure function of (experiment seed, sample seed,
// dimension, substream, counter). There is no generator state, so the draw
// for dimension i can be produced in O(1) without touching any other
// dimension, and two vectors that share dimension i see the same numbers.

#include <cstdint>

namespace ccws::rng {

/// Tags separating the independent quantities drawn for one dimension.
enum class Substream : std::uint8_t {
  kCwsR = 1,
  kCwsC = 2,
  kCwsBeta = 3,
  kProjection = 4,
  kPermutation = 5,
  kCohortSeed = 6,
  kRandomGrouping = 7,
  kGenerator = 8,
};

struct StreamKey {
  std::uint64_t experiment_seed = 0;
  std::uint64_t sample_seed = 0;
  std::uint64_t dimension = 0;
  Substream substream = Substream::kCwsR;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// SplitMix64 output finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace detail {

// Source of truth for the key schedule. Changing any constant here changes
// every stream; tests/data/rng_vectors.txt pins the result.
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
inline constexpr std::uint64_t kSaltExperiment = 0x2545f4914f6cdd1dULL;
inline constexpr std::uint64_t kSaltSample = 0xd1b54a32d192ed03ULL;
inline constexpr std::uint64_t kSaltDimension = 0x8cb92ba72f3d8dd7ULL;
inline constexpr std::uint64_t kSaltSubstream = 0xaef17502108ef2d9ULL;
inline constexpr std::uint64_t kSaltCounter = 0xdb4f0b9175ae2165ULL;

constexpr std::uint64_t absorb(std::uint64_t state, std::uint64_t value,
                               std::uint64_t salt) noexcept {
  return mix64(state ^ (value * kGolden + salt));
}

}  // namespace detail

// Staged evaluation of stream_word. Hot loops hoist the experiment/sample
// prefix out of the per-dimension loop; the composition is bit-identical to
// stream_word().
constexpr std::uint64_t sample_prefix(std::uint64_t experiment_seed,
                                      std::uint64_t sample_seed) noexcept {
  return detail::absorb(detail::absorb(0, experiment_seed, detail::kSaltExperiment),
                        sample_seed, detail::kSaltSample);
}

constexpr std::uint64_t dimension_prefix(std::uint64_t sample_state,
                                         std::uint64_t dimension) noexcept {
  return detail::absorb(sample_state, dimension, detail::kSaltDimension);
}

constexpr std::uint64_t substream_prefix(std::uint64_t dimension_state,
                                         Substream substream) noexcept {
  return detail::absorb(dimension_state, static_cast<std::uint64_t>(substream),
                        detail::kSaltSubstream);
}

constexpr std::uint64_t word_at(std::uint64_t substream_state,
                                std::uint64_t counter) noexcept {
  return detail::absorb(substream_state, counter, detail::kSaltCounter);
}

constexpr std::uint64_t key_prefix(const StreamKey& key) noexcept {
  return substream_prefix(
      dimension_prefix(sample_prefix(key.experiment_seed, key.sample_seed), key.dimension),
      key.substream);
}

/// Raw 64-bit word of the stream identified by `key` at position `counter`.
constexpr std::uint64_t stream_word(const StreamKey& key, std::uint64_t counter) noexcept {
  return word_at(key_prefix(key), counter);
}

/// Maps a word into the open interval (0,1): ((w >> 11) + 0.5) * 2^-53.
constexpr double to_open_unit(std::uint64_t word) noexcept {
  // The top word would round to exactly 1.0; pin it just below.
  const double u = (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
  return u < 1.0 ? u : 0x1.fffffffffffffp-1;
}

double uniform01(const StreamKey& key, std::uint64_t counter) noexcept;

/// Gamma(2,1) as -ln(u1) - ln(u2) with u1, u2 at counters 2k and 2k+1.
double gamma21(const StreamKey& key, std::uint64_t counter) noexcept;

/// Standard normal by Box-Muller on the uniforms at counters 2k and 2k+1
/// (cosine branch only).
double gaussian(const StreamKey& key, std::uint64_t counter) noexcept;

/// Gamma(2,1) from two uniforms already drawn.
double gamma21_from(double u1, double u2) noexcept;
double gaussian_from(double u1, double u2) noexcept;

/// Sequential reader over one keyed stream. Convenience for generators that
/// consume a variable number of draws per entity.
class KeyedStream {
 public:
  explicit KeyedStream(const StreamKey& key) noexcept : prefix_(key_prefix(key)) {}

  std::uint64_t next_word() noexcept { return word_at(prefix_, counter_++); }
  double next_uniform() noexcept { return to_open_unit(next_word()); }
  double next_gaussian() noexcept;
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) noexcept;
  /// Poisson(lambda) by multiplication of uniforms; intended for small lambda.
  std::uint64_t next_poisson(double lambda) noexcept;

 private:
  std::uint64_t prefix_;
  std::uint64_t counter_ = 0;
};

}  // namespace ccws::rng
