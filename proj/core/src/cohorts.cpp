#include "ccws/cohorts.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "ccws/errors.hpp"
#include "ccws/keyed_rng.hpp"
#include "ccws/parallel.hpp"

namespace ccws {

Cohort make_cohort(const Dataset& dataset, std::vector<std::size_t> members) {
  std::sort(members.begin(), members.end());
  std::vector<const std::string*> ids;
  ids.reserve(members.size());
  for (std::size_t i : members) {
    if (i >= dataset.size()) throw LookupError("cohort member index out of range");
    ids.push_back(&dataset[i].id);
  }
  std::sort(ids.begin(), ids.end(), [](const auto* a, const auto* b) { return *a < *b; });
  std::string canonical;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k > 0) canonical.push_back('\n');
    canonical += *ids[k];
  }
  return Cohort{sha256(canonical), std::move(members)};
}

namespace {

void require_feasible(const Dataset& dataset, std::size_t k) {
  if (k == 0) throw ConfigError("K must be >= 1");
  if (dataset.size() < k) {
    throw InfeasibleError("cannot form K-anonymous cohorts: n=" + std::to_string(dataset.size()) +
                          " < K=" + std::to_string(k));
  }
}

CohortAssignment finalize(const Dataset& dataset, std::vector<std::vector<std::size_t>> groups,
                          AssignmentParams params) {
  CohortAssignment out;
  out.params = std::move(params);
  out.user_count = dataset.size();
  out.cohorts.reserve(groups.size());
  for (auto& g : groups) out.cohorts.push_back(make_cohort(dataset, std::move(g)));
  std::sort(out.cohorts.begin(), out.cohorts.end(),
            [](const Cohort& a, const Cohort& b) { return a.members.front() < b.members.front(); });
  out.peak_cohorts = out.cohorts.size();
  return out;
}

// Flattened CSR copy of the (optionally reweighted) user vectors with
// p * ln(w) precomputed, the only per-entry quantity CWS needs.
struct ScaledLogCsr {
  std::vector<std::size_t> offsets;
  std::vector<Dim> dims;
  std::vector<double> scaled_log;
};

ScaledLogCsr prepare_ccws_input(const Dataset& dataset, const CcwsParams& params) {
  ScaledLogCsr csr;
  csr.offsets.reserve(dataset.size() + 1);
  csr.offsets.push_back(0);
  for (const User& user : dataset.users()) {
    const SparseVector reweighted = params.feature_importance.empty()
                                        ? SparseVector()
                                        : apply_feature_importance(user.vector,
                                                                   params.feature_importance);
    const SparseVector& u = params.feature_importance.empty() ? user.vector : reweighted;
    if (u.empty()) throw UndefinedHashError("cws: user '" + user.id + "' has empty support");
    for (std::size_t j = 0; j < u.size(); ++j) {
      csr.dims.push_back(u.dims()[j]);
      csr.scaled_log.push_back(params.p * std::log(u.weights()[j]));
    }
    csr.offsets.push_back(csr.dims.size());
  }
  return csr;
}

struct OpenCohort {
  std::vector<std::size_t> members;
  std::uint64_t ordinal = 0;
};

}  // namespace

std::uint64_t ccws_sample_seed(std::uint64_t experiment_seed, std::uint64_t iteration,
                               std::uint64_t ordinal) noexcept {
  return rng::stream_word(
      rng::StreamKey{experiment_seed, iteration, ordinal, rng::Substream::kCohortSeed}, 0);
}

CohortAssignment build_ccws(const Dataset& dataset, const CcwsParams& params) {
  require_feasible(dataset, params.k);
  if (params.max_iterations == 0) throw ConfigError("T must be >= 1");
  if (!(params.p > 0.0) || !std::isfinite(params.p)) throw ConfigError("p must be positive");
  if (params.stall_limit == 0) throw ConfigError("stall limit must be >= 1");

  const std::size_t n = dataset.size();
  const std::size_t k = params.k;
  const std::uint64_t d = dataset.dimensionality();
  const ScaledLogCsr csr = prepare_ccws_input(dataset, params);

  std::vector<std::vector<std::size_t>> closed;
  std::vector<OpenCohort> open;
  std::uint64_t next_ordinal = 0;
  {
    OpenCohort root;
    root.members.resize(n);
    std::iota(root.members.begin(), root.members.end(), std::size_t{0});
    root.ordinal = next_ordinal++;
    if (n >= 2 * k) {
      open.push_back(std::move(root));
    } else {
      closed.push_back(std::move(root.members));
    }
  }

  std::vector<std::unique_ptr<DimMemo<CwsDraws>>> memos(std::max(1u, thread_count()));
  std::vector<std::uint64_t> count_tag(d, 0);
  std::vector<std::size_t> counts(d, 0);
  std::uint64_t count_epoch = 0;

  std::vector<std::size_t> offsets;
  std::vector<std::uint64_t> states;
  std::vector<Dim> hashes;

  std::size_t iterations_used = 0;
  std::size_t stalled = 0;
  std::size_t peak = open.size() + closed.size();

  for (std::size_t iter = 1; iter <= params.max_iterations && !open.empty(); ++iter) {
    iterations_used = iter;

    // Hash phase: one fresh sample per open cohort, every member hashed.
    offsets.assign(1, 0);
    states.clear();
    for (const OpenCohort& c : open) {
      offsets.push_back(offsets.back() + c.members.size());
      states.push_back(rng::sample_prefix(params.experiment_seed,
                                          ccws_sample_seed(params.experiment_seed, iter, c.ordinal)));
    }
    const std::size_t total = offsets.back();
    hashes.assign(total, 0);

    parallel_for(total, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
      if (!memos[chunk]) memos[chunk] = std::make_unique<DimMemo<CwsDraws>>(d);
      DimMemo<CwsDraws>& memo = *memos[chunk];
      std::size_t c = static_cast<std::size_t>(
          std::upper_bound(offsets.begin(), offsets.end(), begin) - offsets.begin() - 1);
      for (std::size_t pos = begin; pos < end; ++pos) {
        while (pos >= offsets[c + 1]) ++c;
        const std::uint64_t state = states[c];
        const std::size_t user = open[c].members[pos - offsets[c]];
        CwsArgmin argmin;
        for (std::size_t e = csr.offsets[user]; e < csr.offsets[user + 1]; ++e) {
          argmin.visit(csr.dims[e], csr.scaled_log[e], memo.get(state, csr.dims[e], cws_draws));
        }
        hashes[pos] = argmin.result().istar;
      }
    });

    // Commit phase: single-threaded, in cohort order.
    std::vector<OpenCohort> next_open;
    next_open.reserve(open.size() + 8);
    std::size_t splits = 0;
    for (std::size_t c = 0; c < open.size(); ++c) {
      ++count_epoch;
      std::size_t max_count = 0;
      Dim max_hash = 0;
      for (std::size_t pos = offsets[c]; pos < offsets[c + 1]; ++pos) {
        const Dim h = hashes[pos];
        if (count_tag[h] != count_epoch) {
          count_tag[h] = count_epoch;
          counts[h] = 0;
        }
        const std::size_t cnt = ++counts[h];
        if (cnt > max_count || (cnt == max_count && h < max_hash)) {
          max_count = cnt;
          max_hash = h;
        }
      }

      OpenCohort& cohort = open[c];
      const std::size_t size = cohort.members.size();
      if (max_count < k || size - max_count < k) {
        next_open.push_back(std::move(cohort));
        continue;
      }

      std::vector<std::size_t> split;
      std::vector<std::size_t> rest;
      split.reserve(max_count);
      rest.reserve(size - max_count);
      for (std::size_t pos = offsets[c]; pos < offsets[c + 1]; ++pos) {
        (hashes[pos] == max_hash ? split : rest).push_back(cohort.members[pos - offsets[c]]);
      }
      if (split.size() < k || rest.size() < k) {
        throw std::logic_error("ccws: accepted split violates K-anonymity");
      }
      ++splits;
      for (auto* part : {&split, &rest}) {
        const std::uint64_t ordinal = next_ordinal++;
        if (part->size() >= 2 * k) {
          next_open.push_back(OpenCohort{std::move(*part), ordinal});
        } else {
          closed.push_back(std::move(*part));
        }
      }
    }
    open = std::move(next_open);
    peak = std::max(peak, open.size() + closed.size());

    if (params.on_iteration) {
      params.on_iteration(CcwsIterationStats{iter, open.size() + closed.size(), offsets.size() - 1,
                                             total, splits});
    }
    stalled = splits == 0 ? stalled + 1 : 0;
    if (stalled >= params.stall_limit) break;
  }

  for (OpenCohort& c : open) closed.push_back(std::move(c.members));

  AssignmentParams recorded;
  recorded.method = "ccws";
  recorded.k = k;
  recorded.max_iterations = params.max_iterations;
  recorded.p = params.p;
  recorded.experiment_seed = params.experiment_seed;
  CohortAssignment out = finalize(dataset, std::move(closed), std::move(recorded));
  out.iterations_used = iterations_used;
  out.peak_cohorts = peak;
  return out;
}

CohortAssignment build_hash_and_sort(const Dataset& dataset, const HashMethod& method,
                                     std::size_t m, std::size_t k,
                                     std::uint64_t experiment_seed) {
  require_feasible(dataset, k);
  if (m == 0) throw ConfigError("m must be >= 1");
  const std::size_t n = dataset.size();
  const HashMatrix matrix = hash_dataset(dataset, method, m, experiment_seed);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = matrix.row(a);
    const auto rb = matrix.row(b);
    const auto cmp = std::lexicographical_compare_three_way(ra.begin(), ra.end(), rb.begin(),
                                                            rb.end());
    if (cmp != 0) return cmp < 0;
    return dataset[a].id < dataset[b].id;
  });

  const std::size_t groups = n / k;
  std::vector<std::vector<std::size_t>> cohorts(groups);
  for (std::size_t pos = 0; pos < n; ++pos) {
    cohorts[std::min(pos / k, groups - 1)].push_back(order[pos]);
  }

  AssignmentParams recorded;
  recorded.method = to_string(method.family);
  recorded.k = k;
  recorded.p = method.p;
  recorded.m = m;
  recorded.experiment_seed = experiment_seed;
  recorded.cws_bits = method.cws_bits == CwsBits::kFull ? "full" : "0";
  return finalize(dataset, std::move(cohorts), std::move(recorded));
}

CohortAssignment build_random(const Dataset& dataset, std::size_t k,
                              std::uint64_t experiment_seed) {
  require_feasible(dataset, k);
  const std::size_t n = dataset.size();
  const std::size_t bucket_count = std::max<std::size_t>(1, n / (2 * k));

  std::vector<std::vector<std::size_t>> buckets(bucket_count);
  for (std::size_t i = 0; i < n; ++i) {
    rng::KeyedStream stream(
        rng::StreamKey{experiment_seed, 0, i, rng::Substream::kRandomGrouping});
    buckets[stream.next_below(bucket_count)].push_back(i);
  }

  // Dissolve the smallest undersized bucket into the survivors, round-robin,
  // until every survivor holds at least K users.
  std::vector<bool> alive(bucket_count, true);
  std::size_t alive_count = bucket_count;
  std::size_t cursor = 0;
  while (alive_count > 1) {
    std::size_t victim = bucket_count;
    for (std::size_t b = 0; b < bucket_count; ++b) {
      if (alive[b] && buckets[b].size() < k &&
          (victim == bucket_count || buckets[b].size() < buckets[victim].size())) {
        victim = b;
      }
    }
    if (victim == bucket_count) break;
    alive[victim] = false;
    --alive_count;
    for (std::size_t user : buckets[victim]) {
      do {
        cursor = (cursor + 1) % bucket_count;
      } while (!alive[cursor]);
      buckets[cursor].push_back(user);
    }
    buckets[victim].clear();
  }

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t b = 0; b < bucket_count; ++b) {
    if (alive[b]) groups.push_back(std::move(buckets[b]));
  }

  AssignmentParams recorded;
  recorded.method = "random";
  recorded.k = k;
  recorded.experiment_seed = experiment_seed;
  return finalize(dataset, std::move(groups), std::move(recorded));
}

SparseVector cohort_identity(const Cohort& cohort, const Dataset& dataset) {
  if (cohort.members.empty()) throw InvalidArgumentError("cohort_identity: empty cohort");
  std::map<Dim, double> sums;
  for (std::size_t i : cohort.members) {
    if (i >= dataset.size()) throw LookupError("cohort_identity: unknown member index");
    const SparseVector& u = dataset[i].vector;
    for (std::size_t j = 0; j < u.size(); ++j) sums[u.dims()[j]] += u.weights()[j];
  }
  const double count = static_cast<double>(cohort.members.size());
  std::vector<Dim> dims;
  std::vector<double> weights;
  dims.reserve(sums.size());
  weights.reserve(sums.size());
  for (const auto& [dim, sum] : sums) {
    dims.push_back(dim);
    weights.push_back(sum / count);
  }
  return SparseVector(dataset.dimensionality(), std::move(dims), std::move(weights));
}

KAnonymityReport verify_k_anonymity(const CohortAssignment& assignment, std::size_t k) {
  KAnonymityReport report;
  std::vector<std::size_t> seen(assignment.user_count, 0);
  std::size_t out_of_range = 0;
  for (const Cohort& c : assignment.cohorts) {
    for (std::size_t i : c.members) {
      if (i < seen.size()) {
        ++seen[i];
      } else {
        ++out_of_range;
      }
    }
  }
  for (std::size_t count : seen) {
    if (count == 0) ++report.missing_users;
    if (count > 1) ++report.duplicated_users;
  }
  for (const Cohort& c : assignment.cohorts) {
    bool bad = c.size() < k;
    for (std::size_t i : c.members) {
      if (i >= seen.size() || seen[i] > 1) bad = true;
    }
    if (bad) report.violations.push_back(c.id);
  }
  report.ok = report.violations.empty() && report.missing_users == 0 &&
              report.duplicated_users == 0 && out_of_range == 0;
  return report;
}

std::vector<SizeBucket> size_distribution(const CohortAssignment& assignment) {
  std::map<std::size_t, std::size_t> counts;
  for (const Cohort& c : assignment.cohorts) ++counts[c.size()];
  std::vector<SizeBucket> out;
  const double total = static_cast<double>(assignment.cohorts.size());
  std::size_t running = 0;
  for (const auto& [size, count] : counts) {
    running += count;
    out.push_back(SizeBucket{size, count, static_cast<double>(running) / total});
  }
  if (!out.empty()) out.back().cumulative_fraction = 1.0;
  return out;
}

}  // namespace ccws
