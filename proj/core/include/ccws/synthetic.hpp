#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ccws/dataset.hpp"
#include "ccws/evaluation.hpp"

namespace ccws {

/// Planted-cluster model. Each cluster owns a random characteristic support
/// of `support` dimensions; each user picks a cluster, keeps every
/// characteristic feature with probability 1 - noise, adds Poisson(noise *
/// support) off-support features, and draws every weight from
/// LogNormal(log_mean, log_sigma). Campaigns target 3-8 characteristic
/// features of one cluster with min_weight at the weight law's 25th
/// percentile.
struct SyntheticConfig {
  std::size_t n = 10000;
  std::uint64_t d = 10000;
  std::size_t clusters = 50;
  std::size_t support = 40;
  double noise = 0.1;
  double log_mean = 0.0;
  double log_sigma = 0.5;
  std::size_t campaigns_per_cluster = 4;
  std::uint64_t seed = 42;

  /// Throws ConfigError for infeasible settings.
  void validate() const;
};

struct SyntheticData {
  Dataset dataset;
  std::vector<Campaign> campaigns;
  /// Cluster of each user, aligned with dataset order.
  std::vector<std::size_t> labels;
};

/// Deterministic in the config (seed included).
SyntheticData generate_synthetic(const SyntheticConfig& config);

/// Campaign threshold: the 25th percentile of the weight law.
double campaign_min_weight(const SyntheticConfig& config);

/// `user_id<TAB>cluster` lines.
void write_labels(const SyntheticData& data, std::ostream& out);

}  // namespace ccws
