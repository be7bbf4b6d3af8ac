#include "ccws/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "ccws/errors.hpp"
#include "ccws/parallel.hpp"

namespace ccws {

void Campaign::validate(std::uint64_t dimensionality) const {
  if (criteria.empty()) throw InvalidArgumentError("campaign '" + id + "' has no criteria");
  std::set<Dim> seen;
  for (const Criterion& c : criteria) {
    if (c.dim >= dimensionality) {
      throw InvalidArgumentError("campaign '" + id + "' targets dimension out of range");
    }
    if (!seen.insert(c.dim).second) {
      throw InvalidArgumentError("campaign '" + id + "' repeats a dimension");
    }
    if (!(c.min_weight > 0.0) || !std::isfinite(c.min_weight)) {
      throw InvalidArgumentError("campaign '" + id + "' has a non-positive threshold");
    }
  }
}

bool user_matches(const SparseVector& u, const Campaign& campaign) {
  return std::all_of(campaign.criteria.begin(), campaign.criteria.end(),
                     [&](const Criterion& c) { return u.weight_at(c.dim) >= c.min_weight; });
}

bool cohort_matches(const SparseVector& identity, const Campaign& campaign, double tau) {
  return std::all_of(campaign.criteria.begin(), campaign.criteria.end(), [&](const Criterion& c) {
    return identity.weight_at(c.dim) >= tau * c.min_weight;
  });
}

RecallReport evaluate(const CohortAssignment& assignment, const Dataset& dataset,
                      std::span<const Campaign> campaigns, double tau) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> owner(dataset.size(), kNone);
  for (std::size_t c = 0; c < assignment.cohorts.size(); ++c) {
    for (std::size_t i : assignment.cohorts[c].members) {
      if (i >= owner.size()) throw PartitionError("assignment refers to a user outside the dataset");
      if (owner[i] != kNone) throw PartitionError("user '" + dataset[i].id + "' is in two cohorts");
      owner[i] = c;
    }
  }
  for (std::size_t i = 0; i < owner.size(); ++i) {
    if (owner[i] == kNone) throw PartitionError("user '" + dataset[i].id + "' has no cohort");
  }

  std::vector<SparseVector> identities(assignment.cohorts.size());
  parallel_for(identities.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      identities[c] = cohort_identity(assignment.cohorts[c], dataset);
    }
  }, 64);

  RecallReport report;
  report.per_campaign.resize(campaigns.size());
  parallel_for(campaigns.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<char> matched(identities.size());
    for (std::size_t j = begin; j < end; ++j) {
      const Campaign& campaign = campaigns[j];
      for (std::size_t c = 0; c < identities.size(); ++c) {
        matched[c] = cohort_matches(identities[c], campaign, tau) ? 1 : 0;
      }
      CampaignCounts counts{campaign.id, 0, 0, 0};
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const bool user_hit = user_matches(dataset[i].vector, campaign);
        const bool cohort_hit = matched[owner[i]] != 0;
        if (user_hit && cohort_hit) ++counts.tp;
        if (!user_hit && cohort_hit) ++counts.fp;
        if (user_hit && !cohort_hit) ++counts.fn;
      }
      report.per_campaign[j] = std::move(counts);
    }
  }, 1);

  std::size_t tp_sum = 0;
  std::size_t fn_sum = 0;
  double recall_sum = 0.0;
  std::size_t included = 0;
  for (const CampaignCounts& c : report.per_campaign) {
    if (c.tp + c.fn == 0) {
      ++report.campaigns_excluded;
      continue;
    }
    tp_sum += c.tp;
    fn_sum += c.fn;
    recall_sum += static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    ++included;
  }
  if (included == 0) {
    report.macro_recall = std::numeric_limits<double>::quiet_NaN();
    report.micro_recall = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.macro_recall = static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum);
    report.micro_recall = recall_sum / static_cast<double>(included);
  }
  return report;
}

std::vector<Campaign> parse_campaigns(std::istream& in, std::uint64_t dimensionality) {
  std::vector<Campaign> out;
  std::set<std::string> ids;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError(line_no, "expected campaign_id<TAB>criteria");
    }
    Campaign campaign;
    campaign.id = std::string(line.substr(0, tab));
    if (!ids.insert(campaign.id).second) {
      throw ParseError(line_no, "duplicate campaign id '" + campaign.id + "'");
    }
    std::istringstream tokens{std::string(line.substr(tab + 1))};
    std::string token;
    while (tokens >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(line_no, "expected idx:min_weight");
      const auto idx = detail::parse_u64(std::string_view(token).substr(0, colon));
      const auto w = detail::parse_double(std::string_view(token).substr(colon + 1));
      if (!idx || *idx > std::numeric_limits<Dim>::max() || !w) {
        throw ParseError(line_no, "bad criterion '" + token + "'");
      }
      campaign.criteria.push_back(Criterion{static_cast<Dim>(*idx), *w});
    }
    try {
      campaign.validate(dimensionality);
    } catch (const InvalidArgumentError& e) {
      throw ParseError(line_no, e.what());
    }
    out.push_back(std::move(campaign));
  }
  return out;
}

void write_campaigns(std::span<const Campaign> campaigns, std::ostream& out) {
  for (const Campaign& c : campaigns) {
    out << c.id << '\t';
    for (std::size_t k = 0; k < c.criteria.size(); ++k) {
      if (k > 0) out << ' ';
      out << c.criteria[k].dim << ':' << detail::format_double(c.criteria[k].min_weight);
    }
    out << '\n';
  }
}

std::vector<Campaign> load_campaigns(const std::filesystem::path& path,
                                     std::uint64_t dimensionality) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open campaign file '" + path.string() + "'");
  return parse_campaigns(in, dimensionality);
}

void store_campaigns(std::span<const Campaign> campaigns, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write campaign file '" + path.string() + "'");
  write_campaigns(campaigns, out);
}

void write_report_csv(const RecallReport& report, std::ostream& out) {
  out << "campaign_id,tp,fp,fn,recall\n";
  for (const CampaignCounts& c : report.per_campaign) {
    out << c.campaign_id << ',' << c.tp << ',' << c.fp << ',' << c.fn << ',';
    if (c.tp + c.fn > 0) {
      out << detail::format_double(static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn));
    }
    out << '\n';
  }
  out << "# summary\n"
      << "macro_recall," << detail::format_double(report.macro_recall) << '\n'
      << "micro_recall," << detail::format_double(report.micro_recall) << '\n'
      << "campaigns_excluded," << report.campaigns_excluded << '\n';
}

void write_cdf_csv(std::span<const SizeBucket> cdf, std::ostream& out) {
  out << "size,count,cum_fraction\n";
  for (const SizeBucket& b : cdf) {
    out << b.size << ',' << b.count << ',' << detail::format_double(b.cumulative_fraction) << '\n';
  }
}

std::vector<SweepRow> sweep_p(const Dataset& dataset, std::span<const Campaign> campaigns,
                              std::vector<double> grid, const SweepParams& params) {
  if (grid.empty()) throw ConfigError("sweep: empty p grid");
  for (double p : grid) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("sweep: grid values must be positive");
  }
  std::sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double p : grid) {
    CcwsParams ccws;
    ccws.p = p;
    ccws.k = params.k;
    ccws.max_iterations = params.max_iterations;
    ccws.experiment_seed = params.experiment_seed;
    const CohortAssignment assignment = build_ccws(dataset, ccws);
    const RecallReport report = evaluate(assignment, dataset, campaigns, params.tau);
    rows.push_back(SweepRow{p, report.macro_recall, report.micro_recall});
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << "p,macro_recall,micro_recall\n";
  for (const SweepRow& r : rows) {
    out << detail::format_double(r.p) << ',' << detail::format_double(r.macro_recall) << ','
        << detail::format_double(r.micro_recall) << '\n';
  }
}

namespace {

double round_significant(double v) {
  if (v == 0.0) return 0.0;
  std::ostringstream s;
  s.precision(12);
  s << v;
  return std::stod(s.str());
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](std::string_view token) {
    const auto v = detail::parse_double(token);
    if (!v || !std::isfinite(*v)) throw ConfigError("bad grid value '" + std::string(token) + "'");
    return *v;
  };
  std::vector<double> grid;
  const std::string_view view = text;
  if (view.find(':') != std::string_view::npos) {
    const std::size_t a = view.find(':');
    const std::size_t b = view.find(':', a + 1);
    if (b == std::string_view::npos) throw ConfigError("grid must be start:step:end");
    const double start = number(view.substr(0, a));
    const double step = number(view.substr(a + 1, b - a - 1));
    const double end = number(view.substr(b + 1));
    if (!(step > 0.0) || end < start) throw ConfigError("grid needs step > 0 and end >= start");
    const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      grid.push_back(round_significant(start + static_cast<double>(i) * step));
    }
  } else {
    std::size_t pos = 0;
    while (pos <= view.size()) {
      const std::size_t comma = std::min(view.find(',', pos), view.size());
      grid.push_back(number(view.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  for (double p : grid) {
    if (!(p > 0.0)) throw ConfigError("grid values must be positive");
  }
  return grid;
}

}  // namespace ccws
