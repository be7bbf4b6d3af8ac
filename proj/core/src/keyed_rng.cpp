#include "ccws/keyed_rng.hpp"

#include <cmath>
#include <numbers>

namespace ccws::rng {

double uniform01(const StreamKey& key, std::uint64_t counter) noexcept {
  return to_open_unit(stream_word(key, counter));
}

double gamma21_from(double u1, double u2) noexcept {
  return -std::log(u1) - std::log(u2);
}

double gaussian_from(double u1, double u2) noexcept {
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double gamma21(const StreamKey& key, std::uint64_t counter) noexcept {
  const std::uint64_t prefix = key_prefix(key);
  return gamma21_from(to_open_unit(word_at(prefix, 2 * counter)),
                      to_open_unit(word_at(prefix, 2 * counter + 1)));
}

double gaussian(const StreamKey& key, std::uint64_t counter) noexcept {
  const std::uint64_t prefix = key_prefix(key);
  return gaussian_from(to_open_unit(word_at(prefix, 2 * counter)),
                       to_open_unit(word_at(prefix, 2 * counter + 1)));
}

double KeyedStream::next_gaussian() noexcept {
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  return gaussian_from(u1, u2);
}

std::uint64_t KeyedStream::next_below(std::uint64_t bound) noexcept {
  // Lemire's multiply-high reduction; bias is below 2^-64 * bound.
  __extension__ using u128 = unsigned __int128;
  const auto product = static_cast<u128>(next_word()) * bound;
  return static_cast<std::uint64_t>(product >> 64);
}

std::uint64_t KeyedStream::next_poisson(double lambda) noexcept {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  std::uint64_t k = 0;
  double product = next_uniform();
  while (product > limit) {
    ++k;
    product *= next_uniform();
  }
  return k;
}

}  // namespace ccws::rng
