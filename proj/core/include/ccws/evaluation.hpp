#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ccws/cohorts.hpp"
#include "ccws/dataset.hpp"

namespace ccws {

struct Criterion {
  Dim dim = 0;
  double min_weight = 0.0;

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

/// Conjunctive targeting predicate: a user matches when every criterion's
/// dimension carries at least its min_weight.
struct Campaign {
  std::string id;
  std::vector<Criterion> criteria;

  /// Throws InvalidArgumentError unless criteria are non-empty, dimensions
  /// distinct and < d, and thresholds positive.
  void validate(std::uint64_t dimensionality) const;

  friend bool operator==(const Campaign&, const Campaign&) = default;
};

bool user_matches(const SparseVector& u, const Campaign& campaign);

/// Identity weight at every criterion dimension >= tau * min_weight.
bool cohort_matches(const SparseVector& identity, const Campaign& campaign, double tau = 0.5);

struct CampaignCounts {
  std::string campaign_id;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// `macro_recall` pools counts, sum TP / (sum TP + sum FN); `micro_recall`
/// averages TP / (TP + FN) over campaigns. Campaigns with TP + FN = 0 are
/// left out of both and counted in campaigns_excluded; with nothing left
/// both recalls are NaN.
struct RecallReport {
  std::vector<CampaignCounts> per_campaign;
  double macro_recall = 0.0;
  double micro_recall = 0.0;
  std::size_t campaigns_excluded = 0;
};

/// Throws PartitionError when a user belongs to no cohort or to several.
RecallReport evaluate(const CohortAssignment& assignment, const Dataset& dataset,
                      std::span<const Campaign> campaigns, double tau = 0.5);

// Campaign file: `campaign_id<TAB>idx:min_weight idx:min_weight ...`
std::vector<Campaign> parse_campaigns(std::istream& in, std::uint64_t dimensionality);
void write_campaigns(std::span<const Campaign> campaigns, std::ostream& out);
std::vector<Campaign> load_campaigns(const std::filesystem::path& path,
                                     std::uint64_t dimensionality);
void store_campaigns(std::span<const Campaign> campaigns, const std::filesystem::path& path);

/// `campaign_id,tp,fp,fn,recall` rows followed by a `# summary` block.
void write_report_csv(const RecallReport& report, std::ostream& out);
/// `size,count,cum_fraction`
void write_cdf_csv(std::span<const SizeBucket> cdf, std::ostream& out);

struct SweepRow {
  double p = 0.0;
  double macro_recall = 0.0;
  double micro_recall = 0.0;
};

struct SweepParams {
  std::size_t k = 20;
  std::size_t max_iterations = 1000;
  std::uint64_t experiment_seed = 42;
  double tau = 0.5;
};

/// One CCWS build plus evaluation per grid point, in ascending p.
std::vector<SweepRow> sweep_p(const Dataset& dataset, std::span<const Campaign> campaigns,
                              std::vector<double> grid, const SweepParams& params);

/// `p,macro_recall,micro_recall`
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

/// "start:step:end" (inclusive) or a comma-separated list. Grid points are
/// rounded to 12 significant digits so 0.5:0.1:1.5 yields exactly 0.5, 0.6, ...
std::vector<double> parse_grid(const std::string& text);

}  // namespace ccws
