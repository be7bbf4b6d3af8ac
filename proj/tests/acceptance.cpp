// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ccws/cohorts.hpp"
#include "ccws/evaluation.hpp"
#include "ccws/hashers.hpp"
#include "ccws/kernels.hpp"
#include "ccws/parallel.hpp"
#include "ccws/synthetic.hpp"
#include "support/oracles.hpp"

extern char** environ;

namespace {

namespace fs = std::filesystem;
namespace t = ccws::testing;

// ---- pinned tolerances ------------------------------------------------------
constexpr int kCollisionTrials = 10000;
constexpr double kSigmas = 3.0;
constexpr double kCollisionRuntimeLimit = 120.0;  // seconds
constexpr double kZeroBitTolerance = 0.03;
constexpr int kScaleTriples = 1000;
constexpr int kPropertyDatasets = 100;
constexpr std::size_t kK = 20;
constexpr std::size_t kMaxPropertyN = 5000;
constexpr std::size_t kHashLength = 75;  // m for hash-and-sort
constexpr std::uint64_t kOrderingSeeds[] = {1, 2, 3, 4, 5};
constexpr double kMicroMargin = 0.05;
constexpr double kOrderingRuntimeLimit = 600.0;  // seconds
constexpr std::size_t kBenchSizes[] = {25000, 50000, 100000, 200000};
constexpr std::size_t kBenchIterations = 200;
constexpr int kBenchRepeats = 3;  // best of, per size
constexpr double kTimeRatioLimit = 2.5;
constexpr double kMemoryRatioLimit = 2.5;
constexpr double kConcentrationFraction = 0.90;
constexpr std::size_t kConcentrationUpper = 3 * kK;  // sizes in [K, 3K)
constexpr std::size_t kSweepRows = 11;
constexpr double kSweepSpreadNote = 0.15;  // report-only
constexpr unsigned kThreadCounts[] = {1, 8};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int number, bool pass, const std::string& name, const std::string& detail) {
  std::printf("%s  criterion %2d  %s: %s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> signed_dense(const ccws::SignedVector& v) {
  std::vector<double> out(v.dimensionality, 0.0);
  for (std::size_t i = 0; i < v.dims.size(); ++i) out[v.dims[i]] = v.values[i];
  return out;
}

// ---- child processes --------------------------------------------------------

struct Child {
  int rc = -1;
  std::string out;
  long max_rss_kb = 0;
};

Child spawn(const std::vector<std::string>& args, const fs::path& stdout_path) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC,
                                   0644);
  posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  Child child;
  const int err = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (err != 0) return child;
  int status = 0;
  rusage usage{};
  wait4(pid, &status, 0, &usage);
  child.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  child.max_rss_kb = usage.ru_maxrss;
  std::ifstream in(stdout_path);
  std::ostringstream s;
  s << in.rdbuf();
  child.out = s.str();
  return child;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string assignment_bytes(const ccws::CohortAssignment& a, const ccws::Dataset& ds) {
  std::ostringstream out;
  ccws::write_assignment(a, ds, out);
  return out.str();
}

// ---- builders ---------------------------------------------------------------

const char* const kMethods[] = {"ccws", "cws", "minhash", "signrp", "random"};

ccws::CohortAssignment build(const std::string& method, const ccws::Dataset& ds, std::uint64_t seed) {
  if (method == "ccws") {
    ccws::CcwsParams params;
    params.k = kK;
    params.experiment_seed = seed;
    return ccws::build_ccws(ds, params);
  }
  if (method == "random") return ccws::build_random(ds, kK, seed);
  return ccws::build_hash_and_sort(ds, {ccws::parse_hash_family(method), 1.0}, kHashLength, kK, seed);
}

// Independent count of user-matched users, straight from the stored weights.
std::size_t matched_users(const ccws::Dataset& ds, const ccws::Campaign& c) {
  std::size_t n = 0;
  for (std::size_t u = 0; u < ds.size(); ++u) {
    const auto dims = ds[u].vector.dims();
    const auto weights = ds[u].vector.weights();
    bool all = true;
    for (const auto& cr : c.criteria) {
      bool hit = false;
      for (std::size_t e = 0; e < dims.size(); ++e) hit |= dims[e] == cr.dim && weights[e] >= cr.min_weight;
      all &= hit;
    }
    n += all;
  }
  return n;
}

bool counting_identity_holds(const ccws::RecallReport& r, const ccws::Dataset& ds,
                             const std::vector<ccws::Campaign>& campaigns) {
  for (std::size_t c = 0; c < campaigns.size(); ++c) {
    if (r.per_campaign[c].tp + r.per_campaign[c].fn != matched_users(ds, campaigns[c])) return false;
  }
  return true;
}

// ---- shared state between criteria -----------------------------------------

bool counting_identity_ok = true;
std::size_t evaluations_checked = 0;
bool determinism_ok = true;
std::size_t determinism_compared = 0;
std::vector<ccws::CohortAssignment> ordering_ccws;  // criterion 7 input

// ---- criteria ---------------------------------------------------------------

void criterion_1() {
  const auto start = Clock::now();
  int checks = 0;
  int within = 0;
  std::string worst;
  double worst_z = 0.0;
  auto check = [&](const std::string& label, double q, int hits) {
    const double rate = hits / double(kCollisionTrials);
    const double band = kSigmas * std::sqrt(q * (1.0 - q) / kCollisionTrials);
    ++checks;
    within += std::abs(rate - q) <= band;
    const double z = std::abs(rate - q) / (band / kSigmas);
    if (z > worst_z) {
      worst_z = z;
      worst = fmt("%s q=%.4f rate=%.4f", label.c_str(), q, rate);
    }
  };

  for (const auto& pair : t::minhash_battery()) {
    const double q = t::dense_binary_jaccard(t::to_dense(pair.x), t::to_dense(pair.y));
    int hits = 0;
    for (int s = 0; s < kCollisionTrials; ++s) {
      hits += ccws::minhash(pair.x, s, 42) == ccws::minhash(pair.y, s, 42);
    }
    check("minhash", q, hits);
  }
  for (double p : {0.5, 1.0, 1.5}) {
    for (const auto& pair : t::cws_battery()) {
      const double q = t::dense_pgmm(t::to_dense(pair.x), t::to_dense(pair.y), p);
      int hits = 0;
      for (int s = 0; s < kCollisionTrials; ++s) {
        hits += ccws::cws_sample(pair.x, p, s, 42) == ccws::cws_sample(pair.y, p, s, 42);
      }
      check(fmt("cws p=%.1f", p), q, hits);
    }
  }
  for (const auto& [x, y] : t::signrp_battery()) {
    const double q = t::signrp_collision_law(signed_dense(x), signed_dense(y));
    int hits = 0;
    for (int s = 0; s < kCollisionTrials; ++s) hits += ccws::signrp(x, s, 42) == ccws::signrp(y, s, 42);
    check("signrp", q, hits);
  }
  const double elapsed = seconds_since(start);
  report(1, within == checks && elapsed <= kCollisionRuntimeLimit, "collision laws",
         fmt("%d/%d rates within 3 sigma, largest deviation %.2f sigma (%s), %.1f s", within, checks,
             worst_z, worst.c_str(), elapsed));
}

void criterion_2() {
  double max_err = 0.0;
  for (const auto& pair : t::cws_battery()) {
    const double q = t::dense_pgmm(t::to_dense(pair.x), t::to_dense(pair.y), 1.0);
    int hits = 0;
    for (int s = 0; s < kCollisionTrials; ++s) {
      hits += ccws::cws_zero_bit(pair.x, 1.0, s, 42) == ccws::cws_zero_bit(pair.y, 1.0, s, 42);
    }
    max_err = std::max(max_err, std::abs(hits / double(kCollisionTrials) - q));
  }
  report(2, max_err <= kZeroBitTolerance, "0-bit CWS approximation",
         fmt("max |rate - pgmm| = %.4f over 10 pairs (limit %.2f)", max_err, kZeroBitTolerance));
}

void criterion_3() {
  std::mt19937_64 gen(20240303);
  std::uniform_real_distribution<double> p_dist(0.1, 3.0);
  int equal = 0;
  for (int i = 0; i < kScaleTriples; ++i) {
    const auto u = t::random_sparse(gen, 5000, 60, 1e-3, 1e3);
    const double p = p_dist(gen);
    const std::uint64_t s = gen();
    equal += ccws::cws_sample(u, p, s, 7) == ccws::cws_sample(ccws::elementwise_power(u, p), 1.0, s, 7);
  }
  report(3, equal == kScaleTriples, "scale-p identity",
         fmt("%d/%d triples identical", equal, kScaleTriples));
}

void criterion_4() {
  const auto start = Clock::now();
  std::size_t builds = 0;
  std::size_t violations = 0;
  for (int trial = 0; trial < kPropertyDatasets; ++trial) {
    std::mt19937_64 gen(5000 + trial);
    ccws::SyntheticConfig cfg;
    cfg.n = trial == 0 ? kK : std::uniform_int_distribution<std::size_t>(kK, kMaxPropertyN)(gen);
    cfg.clusters = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(cfg.n, 60))(gen);
    cfg.support = std::uniform_int_distribution<std::size_t>(3, 40)(gen);
    cfg.d = std::max<std::uint64_t>(500, 2 * cfg.clusters * cfg.support);
    cfg.noise = std::uniform_real_distribution<double>(0.0, 0.6)(gen);
    cfg.log_sigma = std::uniform_real_distribution<double>(0.1, 1.5)(gen);
    cfg.seed = gen();
    const auto ds = ccws::generate_synthetic(cfg).dataset;
    for (const char* method : kMethods) {
      std::string first;
      for (unsigned threads : kThreadCounts) {
        ccws::set_thread_count(threads);
        const auto a = build(method, ds, cfg.seed);
        ++builds;
        if (!ccws::verify_k_anonymity(a, kK).ok) ++violations;
        const std::string bytes = assignment_bytes(a, ds);
        if (first.empty()) {
          first = bytes;
        } else {
          determinism_ok &= bytes == first;
          ++determinism_compared;
        }
      }
    }
  }
  ccws::set_thread_count(0);
  report(4, violations == 0, "K-anonymity property",
         fmt("%zu builds over %d datasets (5 builders x threads 1,8), %zu violations, %.1f s", builds,
             kPropertyDatasets, violations, seconds_since(start)));
}

void criterion_5() {
  const auto start = Clock::now();
  const std::size_t n_methods = std::size(kMethods);
  std::vector<double> macro(n_methods, 0.0);
  std::vector<double> micro(n_methods, 0.0);
  for (std::uint64_t seed : kOrderingSeeds) {
    ccws::SyntheticConfig cfg;
    cfg.seed = seed;
    const auto data = ccws::generate_synthetic(cfg);
    for (std::size_t m = 0; m < n_methods; ++m) {
      std::string first;
      for (unsigned threads : kThreadCounts) {
        ccws::set_thread_count(threads);
        auto a = build(kMethods[m], data.dataset, seed);
        const std::string bytes = assignment_bytes(a, data.dataset);
        if (first.empty()) {
          first = bytes;
          const auto r = ccws::evaluate(a, data.dataset, data.campaigns);
          counting_identity_ok &= counting_identity_holds(r, data.dataset, data.campaigns);
          ++evaluations_checked;
          macro[m] += r.macro_recall / std::size(kOrderingSeeds);
          micro[m] += r.micro_recall / std::size(kOrderingSeeds);
          if (m == 0) ordering_ccws.push_back(std::move(a));
        } else {
          determinism_ok &= bytes == first;
          ++determinism_compared;
        }
      }
    }
  }
  ccws::set_thread_count(0);
  const double elapsed = seconds_since(start);

  bool ok = elapsed <= kOrderingRuntimeLimit;
  double best_baseline_micro = 0.0;
  for (std::size_t m = 1; m < n_methods; ++m) {
    ok &= macro[0] > macro[m] && micro[0] > micro[m];
    best_baseline_micro = std::max(best_baseline_micro, micro[m]);
    if (m != n_methods - 1) {
      ok &= macro[n_methods - 1] < macro[m] && micro[n_methods - 1] < micro[m];
    }
  }
  const double margin = micro[0] - best_baseline_micro;
  ok &= margin >= kMicroMargin;
  std::string table;
  for (std::size_t m = 0; m < n_methods; ++m) {
    table += fmt("%s%s %.3f/%.3f", m ? ", " : "", kMethods[m], macro[m], micro[m]);
  }
  report(5, ok, "recall ordering",
         fmt("macro/micro over 5 seeds: %s; micro margin %.3f (need >= %.2f), %.1f s", table.c_str(),
             margin, kMicroMargin, elapsed));
}

void criterion_6(const fs::path& work) {
  std::vector<double> secs;
  std::vector<long> rss;
  bool ran = true;
  for (std::size_t n : kBenchSizes) {
    double best = INFINITY;
    long best_rss = 0;
    for (int rep = 0; rep < kBenchRepeats; ++rep) {
      const Child c = spawn({CCWS_CLI_PATH, "bench", "--sizes", std::to_string(n), "--methods", "ccws",
                             "-T", std::to_string(kBenchIterations)},
                            work / "bench.csv");
      if (c.rc != 0) {
        ran = false;
        break;
      }
      // Second line: n,method,seconds,peak_cohorts
      std::istringstream csv(c.out);
      std::string line;
      std::getline(csv, line);
      std::getline(csv, line);
      std::vector<std::string> f;
      std::istringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      if (f.size() != 4) {
        ran = false;
        break;
      }
      best = std::min(best, std::stod(f[2]));
      best_rss = std::max(best_rss, c.max_rss_kb);
    }
    if (!ran) break;
    secs.push_back(best);
    rss.push_back(best_rss);
  }
  if (!ran) {
    report(6, false, "linear scaling", "bench subprocess failed");
    return;
  }
  bool ok = true;
  std::string detail;
  for (std::size_t i = 0; i < secs.size(); ++i) {
    detail += fmt("%sn=%zu %.3fs %ldMB", i ? ", " : "", kBenchSizes[i], secs[i], rss[i] / 1024);
    if (i > 0) {
      const double tr = secs[i] / secs[i - 1];
      const double mr = double(rss[i]) / double(rss[i - 1]);
      ok &= tr <= kTimeRatioLimit && mr <= kMemoryRatioLimit;
      detail += fmt(" (x%.2f time, x%.2f mem)", tr, mr);
    }
  }
  report(6, ok, "linear scaling", detail + fmt("; T=%zu, best of %d", kBenchIterations, kBenchRepeats));
}

void criterion_7() {
  bool ok = !ordering_ccws.empty();
  double worst_fraction = 1.0;
  std::size_t smallest = SIZE_MAX;
  for (const auto& a : ordering_ccws) {
    std::size_t inside = 0;
    for (const auto& c : a.cohorts) {
      inside += c.size() >= kK && c.size() < kConcentrationUpper;
      smallest = std::min(smallest, c.size());
    }
    const double fraction = inside / double(a.cohorts.size());
    worst_fraction = std::min(worst_fraction, fraction);
  }
  ok &= worst_fraction >= kConcentrationFraction && smallest >= kK;
  report(7, ok, "CCWS size concentration",
         fmt("lowest share of cohorts sized [%zu, %zu) across 5 seeds: %.3f (need >= %.2f); smallest "
             "cohort %zu",
             kK, kConcentrationUpper, worst_fraction, kConcentrationFraction, smallest));
}

void criterion_8() {
  ccws::Dataset ds(2);
  for (int i = 0; i < 10; ++i) {
    ds.add("u" + std::to_string(i), i < 5 ? ccws::SparseVector::from_pairs(2, {{0, 1.0}})
                                          : ccws::SparseVector::from_pairs(2, {{1, 1.0}}));
  }
  ccws::CohortAssignment a;
  a.user_count = 10;
  a.cohorts = {ccws::make_cohort(ds, {0, 1, 2, 3, 5, 6}), ccws::make_cohort(ds, {4, 7, 8, 9})};
  const std::vector<ccws::Campaign> cs = {{"c", {{0, 1.0}}}};
  const auto r = ccws::evaluate(a, ds, cs);
  const bool fixture = r.per_campaign[0].tp == 4 && r.per_campaign[0].fn == 1 &&
                       r.macro_recall == 0.8 && r.micro_recall == 0.8;
  counting_identity_ok &= counting_identity_holds(r, ds, cs);
  ++evaluations_checked;
  report(8, fixture && counting_identity_ok, "metric correctness",
         fmt("fixture TP=%zu FN=%zu macro=%.17g micro=%.17g; TP+FN identity %s on %zu evaluations",
             r.per_campaign[0].tp, r.per_campaign[0].fn, r.macro_recall, r.micro_recall,
             counting_identity_ok ? "held" : "BROKEN", evaluations_checked));
}

void criterion_9(const fs::path& work) {
  const fs::path data = work / "sweep";
  const Child g = spawn({CCWS_CLI_PATH, "gen", "--out-dir", data.string()}, work / "gen.out");
  const Child s = spawn({CCWS_CLI_PATH, "sweep", "--input", (data / "dataset.txt").string(), "--campaigns",
                         (data / "campaigns.txt").string()},
                        work / "sweep.csv");
  if (g.rc != 0 || s.rc != 0) {
    report(9, false, "p-sweep harness", "gen or sweep subprocess failed");
    return;
  }
  std::istringstream csv(s.out);
  std::string line;
  std::getline(csv, line);
  bool ok = line == "p,macro_recall,micro_recall";
  std::vector<std::array<double, 3>> rows;
  while (std::getline(csv, line)) {
    std::array<double, 3> row{};
    std::istringstream ls(line);
    std::string f;
    for (double& v : row) {
      std::getline(ls, f, ',');
      v = std::stod(f);
    }
    rows.push_back(row);
  }
  ok &= rows.size() == kSweepRows;
  for (std::size_t i = 1; i < rows.size(); ++i) ok &= rows[i - 1][0] < rows[i][0];
  ok &= !rows.empty() && rows.front()[0] == 0.5 && rows.back()[0] == 1.5;
  double lo[2] = {1, 1}, hi[2] = {0, 0};
  double best_p = 0, best_micro = -1;
  for (const auto& r : rows) {
    if (r[0] >= 0.9 - 1e-9 && r[0] <= 1.3 + 1e-9) {
      for (int k = 0; k < 2; ++k) {
        lo[k] = std::min(lo[k], r[k + 1]);
        hi[k] = std::max(hi[k], r[k + 1]);
      }
    }
    if (r[2] > best_micro) best_micro = r[2], best_p = r[0];
  }
  const double spread = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  report(9, ok, "p-sweep harness",
         fmt("%zu rows, p ascending 0.5..1.5; recall spread over p in [0.9, 1.3] = %.3f (%s %.2f, "
             "report-only); best micro %.3f at p=%.1f",
             rows.size(), spread, spread < kSweepSpreadNote ? "below" : "NOT below", kSweepSpreadNote,
             best_micro, best_p));
}

void criterion_10(const fs::path& work) {
  // In-process comparisons were collected by criteria 4 and 5; add the CLI path.
  const fs::path data = work / "det";
  bool cli_ok = spawn({CCWS_CLI_PATH, "gen", "--seed", "1", "--out-dir", data.string()}, work / "gen.out").rc == 0;
  std::size_t files = 0;
  for (const char* method : kMethods) {
    std::string first;
    for (unsigned threads : kThreadCounts) {
      const fs::path out = work / fmt("%s_%u.tsv", method, threads);
      cli_ok &= spawn({CCWS_CLI_PATH, "--threads", std::to_string(threads), "build", "--input",
                       (data / "dataset.txt").string(), "--method", method, "--seed", "1", "--out",
                       out.string()},
                      work / "build.out")
                    .rc == 0;
      const std::string bytes = slurp(out) + slurp(out.string() + ".meta");
      if (first.empty()) {
        first = bytes;
      } else {
        cli_ok &= bytes == first && !bytes.empty();
        ++files;
      }
    }
  }
  report(10, determinism_ok && cli_ok && determinism_compared > 0, "determinism across threads",
         fmt("%zu in-process assignment pairs (criteria 4, 5) and %zu CLI file pairs byte-identical "
             "at --threads 1 vs 8: %s",
             determinism_compared, files, determinism_ok && cli_ok ? "yes" : "NO"));
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "ccws_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto start = Clock::now();

  const std::vector<std::function<void()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      [&] { criterion_6(work); }, criterion_7, criterion_8,
      [&] { criterion_9(work); }, [&] { criterion_10(work); }};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, "exception", e.what());
    }
  }
  std::printf("%d of 10 criteria failed; total %.1f s\n", failures, seconds_since(start));
  fs::remove_all(work);
  return failures;
}
