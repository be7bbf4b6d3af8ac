#include "ccws/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_set>

#include "ccws/errors.hpp"
#include "ccws/keyed_rng.hpp"

namespace ccws {
namespace {

// Entity kinds, carried in the sample-seed slot of the generator's keys.
constexpr std::uint64_t kClusterStream = 1;
constexpr std::uint64_t kUserStream = 2;
constexpr std::uint64_t kCampaignStream = 3;

rng::KeyedStream entity_stream(std::uint64_t seed, std::uint64_t kind, std::uint64_t index) {
  return rng::KeyedStream(rng::StreamKey{seed, kind, index, rng::Substream::kGenerator});
}

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::size_t digits(std::size_t value) { return std::to_string(value).size(); }

// Inverse standard-normal CDF at 0.25.
constexpr double kNormalQuartile = -0.6744897501960817;

}  // namespace

void SyntheticConfig::validate() const {
  if (n == 0) throw ConfigError("synthetic: n must be >= 1");
  if (clusters == 0) throw ConfigError("synthetic: clusters must be >= 1");
  if (support == 0) throw ConfigError("synthetic: support must be >= 1");
  if (d == 0 || d > std::numeric_limits<Dim>::max()) throw ConfigError("synthetic: bad d");
  if (clusters * support > d) throw ConfigError("synthetic: clusters * support exceeds d");
  if (n < clusters) throw ConfigError("synthetic: n must be >= clusters");
  if (!(noise >= 0.0 && noise < 1.0)) throw ConfigError("synthetic: noise must be in [0, 1)");
  if (!(log_sigma >= 0.0) || !std::isfinite(log_sigma) || !std::isfinite(log_mean)) {
    throw ConfigError("synthetic: bad weight law");
  }
}

double campaign_min_weight(const SyntheticConfig& config) {
  return std::exp(config.log_mean + config.log_sigma * kNormalQuartile);
}

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const std::uint64_t d = config.d;
  const std::size_t s = config.support;

  std::vector<std::vector<Dim>> supports(config.clusters);
  for (std::size_t g = 0; g < config.clusters; ++g) {
    auto stream = entity_stream(config.seed, kClusterStream, g);
    std::unordered_set<Dim> chosen;
    while (chosen.size() < s) chosen.insert(static_cast<Dim>(stream.next_below(d)));
    supports[g].assign(chosen.begin(), chosen.end());
    std::sort(supports[g].begin(), supports[g].end());
  }

  auto draw_weight = [&](rng::KeyedStream& stream) {
    return std::exp(config.log_mean + config.log_sigma * stream.next_gaussian());
  };

  SyntheticData out;
  out.dataset = Dataset(d);
  out.labels.reserve(config.n);
  const std::size_t id_width = digits(config.n - 1);
  for (std::size_t i = 0; i < config.n; ++i) {
    auto stream = entity_stream(config.seed, kUserStream, i);
    const std::size_t g = stream.next_below(config.clusters);
    const std::vector<Dim>& own = supports[g];

    std::vector<std::pair<Dim, double>> entries;
    for (Dim dim : own) {
      const bool keep = stream.next_uniform() >= config.noise;
      const double w = draw_weight(stream);
      if (keep) entries.emplace_back(dim, w);
    }
    if (entries.empty()) {
      entries.emplace_back(own[stream.next_below(own.size())], draw_weight(stream));
    }

    const std::uint64_t off_support = d - own.size();
    const std::uint64_t extra = std::min<std::uint64_t>(
        stream.next_poisson(config.noise * static_cast<double>(s)), off_support);
    std::unordered_set<Dim> taken;
    for (std::uint64_t e = 0; e < extra; ++e) {
      Dim dim = 0;
      do {
        dim = static_cast<Dim>(stream.next_below(d));
      } while (std::binary_search(own.begin(), own.end(), dim) || taken.contains(dim));
      taken.insert(dim);
      entries.emplace_back(dim, draw_weight(stream));
    }
    std::sort(entries.begin(), entries.end());
    out.dataset.add("u" + padded(i, id_width), SparseVector::from_pairs(d, entries));
    out.labels.push_back(g);
  }

  const double threshold = campaign_min_weight(config);
  const std::size_t lo = std::min<std::size_t>(3, s);
  const std::size_t hi = std::min<std::size_t>(8, s);
  const std::size_t cluster_width = digits(config.clusters - 1);
  for (std::size_t g = 0; g < config.clusters; ++g) {
    for (std::size_t j = 0; j < config.campaigns_per_cluster; ++j) {
      auto stream = entity_stream(config.seed, kCampaignStream, g * config.campaigns_per_cluster + j);
      const std::size_t size = lo + stream.next_below(hi - lo + 1);
      std::vector<Dim> pool = supports[g];
      // Partial Fisher-Yates over the cluster's characteristic features.
      for (std::size_t k = 0; k < size; ++k) {
        std::swap(pool[k], pool[k + stream.next_below(pool.size() - k)]);
      }
      std::vector<Dim> picked(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(picked.begin(), picked.end());
      Campaign campaign;
      campaign.id = "c" + padded(g, cluster_width) + "_" + std::to_string(j);
      for (Dim dim : picked) campaign.criteria.push_back(Criterion{dim, threshold});
      out.campaigns.push_back(std::move(campaign));
    }
  }
  return out;
}

void write_labels(const SyntheticData& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    out << data.dataset[i].id << '\t' << data.labels[i] << '\n';
  }
}

}  // namespace ccws
