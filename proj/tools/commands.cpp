#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccws/cohorts.hpp"
#include "ccws/dataset.hpp"
#include "ccws/errors.hpp"
#include "ccws/evaluation.hpp"
#include "ccws/hashers.hpp"
#include "ccws/parallel.hpp"
#include "ccws/synthetic.hpp"

namespace ccws::cli {
namespace {

namespace fs = std::filesystem;

struct GenOptions {
  SyntheticConfig config;
  std::string out_dir = ".";
};

struct BuildOptions {
  std::string input;
  std::string out = "assignment.tsv";
  std::string method = "ccws";
  std::size_t k = 20;
  std::size_t iterations = 1000;
  double p = 1.0;
  std::size_t m = 75;
  std::uint64_t seed = 42;
  std::string cws_bits = "0";
  std::size_t stall_limit = 32;
  bool log_iterations = false;
};

struct EvalOptions {
  std::string input;
  std::string assignment;
  std::string campaigns;
  double tau = 0.5;
  std::string report;
  std::string cdf;
};

struct SweepOptions {
  std::string input;
  std::string campaigns;
  std::string grid = "0.5:0.1:1.5";
  std::size_t k = 20;
  std::size_t iterations = 1000;
  std::uint64_t seed = 42;
  double tau = 0.5;
  std::string out;
};

struct BenchOptions {
  std::vector<std::size_t> sizes = {25000, 50000, 100000, 200000};
  std::vector<std::string> methods = {"ccws", "cws", "minhash", "signrp", "random"};
  std::size_t k = 20;
  std::size_t iterations = 200;
  double p = 1.0;
  std::size_t m = 75;
  std::uint64_t seed = 42;
  std::string out;
};

struct VerifyOptions {
  std::string input;
  std::string assignment;
  std::size_t k = 20;
};

struct DebugHashOptions {
  std::string input;
  std::string user;
  std::string method = "cws";
  std::size_t m = 75;
  double p = 1.0;
  std::uint64_t seed = 42;
  std::string cws_bits = "0";
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing ") + what + " path");
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: " + path);
}

CwsBits parse_bits(const std::string& s) {
  if (s == "0") return CwsBits::kZero;
  if (s == "full") return CwsBits::kFull;
  throw ConfigError("cws-bits must be 0 or full, got '" + s + "'");
}

void check_common(std::size_t k, std::size_t iterations, double p, std::size_t m) {
  if (k < 1) throw ConfigError("K must be >= 1");
  if (iterations < 1) throw ConfigError("T must be >= 1");
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("p must be positive");
  if (m < 1) throw ConfigError("m must be >= 1");
}

void check_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename Writer>
void write_file_or_stdout(const std::string& path, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
    std::cout.flush();
  } else {
    write_file(path, writer);
  }
}

CohortAssignment build(const Dataset& dataset, const BuildOptions& o) {
  if (o.method == "ccws") {
    CcwsParams params;
    params.p = o.p;
    params.max_iterations = o.iterations;
    params.k = o.k;
    params.experiment_seed = o.seed;
    params.stall_limit = o.stall_limit;
    if (o.log_iterations) {
      params.on_iteration = [](const CcwsIterationStats& s) {
        std::cerr << "iter " << s.iteration << " cohorts=" << s.cohorts
                  << " active=" << s.active_cohorts << " users=" << s.active_users
                  << " splits=" << s.splits << "\n";
      };
    }
    return build_ccws(dataset, params);
  }
  if (o.method == "random") return build_random(dataset, o.k, o.seed);
  HashMethod method{parse_hash_family(o.method), o.p, parse_bits(o.cws_bits)};
  return build_hash_and_sort(dataset, method, o.m, o.k, o.seed);
}

int cmd_gen(const GenOptions& o) {
  o.config.validate();
  const SyntheticData data = generate_synthetic(o.config);
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  store_dataset(data.dataset, dir / "dataset.txt");
  store_campaigns(data.campaigns, dir / "campaigns.txt");
  write_file(dir / "labels.txt", [&](std::ostream& out) { write_labels(data, out); });
  std::cout << "users=" << data.dataset.size() << " campaigns=" << data.campaigns.size()
            << " dir=" << dir.string() << "\n";
  return kOk;
}

int cmd_build(const BuildOptions& o) {
  check_common(o.k, o.iterations, o.p, o.m);
  if (o.stall_limit < 1) throw ConfigError("stall-limit must be >= 1");
  parse_bits(o.cws_bits);
  require_file(o.input, "dataset");
  const Dataset dataset = load_dataset(o.input);
  if (o.method == "ccws" && dataset.size() >= o.k && dataset.size() < 2 * o.k) {
    std::cerr << "warning: n=" << dataset.size() << " < 2K=" << 2 * o.k
              << "; ccws returns a single cohort\n";
  }
  const CohortAssignment assignment = build(dataset, o);
  store_assignment(assignment, dataset, o.out);

  std::vector<std::size_t> sizes;
  for (const Cohort& c : assignment.cohorts) sizes.push_back(c.size());
  std::sort(sizes.begin(), sizes.end());
  std::cout << "cohorts=" << sizes.size();
  if (!sizes.empty()) {
    std::cout << " min=" << sizes.front() << " median=" << sizes[(sizes.size() - 1) / 2]
              << " max=" << sizes.back();
  }
  std::cout << " iterations=" << assignment.iterations_used << "\n";
  return kOk;
}

int cmd_eval(const EvalOptions& o) {
  check_tau(o.tau);
  require_file(o.input, "dataset");
  require_file(o.assignment, "assignment");
  require_file(o.campaigns, "campaign file");
  const Dataset dataset = load_dataset(o.input);
  const CohortAssignment assignment = load_assignment(o.assignment, dataset);
  const auto campaigns = load_campaigns(o.campaigns, dataset.dimensionality());
  const RecallReport report = evaluate(assignment, dataset, campaigns, o.tau);

  const std::string report_path = o.report.empty() ? o.assignment + ".report.csv" : o.report;
  const std::string cdf_path = o.cdf.empty() ? o.assignment + ".cdf.csv" : o.cdf;
  write_file(report_path, [&](std::ostream& out) { write_report_csv(report, out); });
  const auto cdf = size_distribution(assignment);
  write_file(cdf_path, [&](std::ostream& out) { write_cdf_csv(cdf, out); });
  std::cout << "macro=" << detail::format_double(report.macro_recall)
            << " micro=" << detail::format_double(report.micro_recall)
            << " excluded=" << report.campaigns_excluded << "\n";
  return kOk;
}

int cmd_sweep(const SweepOptions& o) {
  check_common(o.k, o.iterations, 1.0, 1);
  check_tau(o.tau);
  std::vector<double> grid = parse_grid(o.grid);
  require_file(o.input, "dataset");
  require_file(o.campaigns, "campaign file");
  const Dataset dataset = load_dataset(o.input);
  const auto campaigns = load_campaigns(o.campaigns, dataset.dimensionality());
  SweepParams params;
  params.k = o.k;
  params.max_iterations = o.iterations;
  params.experiment_seed = o.seed;
  params.tau = o.tau;
  const auto rows = sweep_p(dataset, campaigns, std::move(grid), params);
  write_file_or_stdout(o.out, [&](std::ostream& out) { write_sweep_csv(rows, out); });
  return kOk;
}

int cmd_bench(const BenchOptions& o) {
  check_common(o.k, o.iterations, o.p, o.m);
  if (o.sizes.empty()) throw ConfigError("bench needs at least one size");
  for (const auto& method : o.methods) {
    if (method != "ccws" && method != "random") parse_hash_family(method);
  }
  std::ostringstream csv;
  csv << "n,method,seconds,peak_cohorts\n";
  for (std::size_t n : o.sizes) {
    SyntheticConfig config;
    config.n = n;
    config.seed = o.seed;
    config.validate();
    const Dataset dataset = generate_synthetic(config).dataset;
    for (const auto& method : o.methods) {
      BuildOptions b;
      b.method = method;
      b.k = o.k;
      b.iterations = o.iterations;
      b.p = o.p;
      b.m = o.m;
      b.seed = o.seed;
      const auto start = std::chrono::steady_clock::now();
      const CohortAssignment a = build(dataset, b);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      const std::size_t peak = std::max(a.peak_cohorts, a.cohorts.size());
      csv << n << ',' << method << ',' << detail::format_double(elapsed.count()) << ',' << peak
          << "\n";
      std::cerr << "n=" << n << " " << method << " " << elapsed.count() << "s\n";
    }
  }
  write_file_or_stdout(o.out, [&](std::ostream& out) { out << csv.str(); });
  return kOk;
}

int cmd_verify(const VerifyOptions& o) {
  if (o.k < 1) throw ConfigError("K must be >= 1");
  require_file(o.input, "dataset");
  require_file(o.assignment, "assignment");
  const Dataset dataset = load_dataset(o.input);
  std::ifstream in(o.assignment, std::ios::binary);
  if (!in) throw IoError("cannot open " + o.assignment);
  const CohortAssignment assignment = parse_assignment(in, &dataset);
  const KAnonymityReport report = verify_k_anonymity(assignment, o.k);
  std::cout << (report.ok ? "ok" : "violation") << " cohorts=" << assignment.cohorts.size()
            << " violations=" << report.violations.size()
            << " duplicated=" << report.duplicated_users << " missing=" << report.missing_users
            << "\n";
  for (const Digest& id : report.violations) std::cout << to_hex(id) << "\n";
  return report.ok ? kOk : kFailed;
}

int cmd_debug_hash(const DebugHashOptions& o) {
  check_common(1, 1, o.p, o.m);
  require_file(o.input, "dataset");
  const Dataset dataset = load_dataset(o.input);
  const User& user = dataset[dataset.index_of(o.user)];
  const HashMethod method{parse_hash_family(o.method), o.p, parse_bits(o.cws_bits)};
  const HashVector hv = hash_vector(user.vector, method, o.m, o.seed);
  std::cout << user.id;
  char buf[17];
  for (std::uint64_t w : hv.values) {
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
    std::cout << ' ' << buf;
  }
  std::cout << "\n";
  return kOk;
}

// Flat `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  require_file(path, "config file");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    std::replace(key.begin(), key.end(), '_', '-');
    out[key] = value;
  }
  return out;
}

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

// Config values become option defaults, so flags given on the command line
// still win. A key is applied to every subcommand that knows it.
void apply_config(CLI::App& app, const std::map<std::string, std::string>& config) {
  for (const auto& [key, value] : config) {
    bool used = false;
    std::vector<CLI::App*> apps = {&app};
    for (CLI::App* sub : app.get_subcommands({})) apps.push_back(sub);
    for (CLI::App* a : apps) {
      CLI::Option* opt = a->get_option_no_throw("--" + key);
      if (opt == nullptr && key.size() == 1) opt = a->get_option_no_throw("-" + key);
      if (opt == nullptr || opt->get_single_name() == "config") continue;
      try {
        opt->default_val(value);
      } catch (const CLI::Error& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
      }
      used = true;
    }
    if (!used) throw ConfigError("unknown config key '" + key + "'");
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"K-anonymous cohort building with consecutive consistent weighted sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ccws 0.1.0");

  unsigned threads = 0;
  std::string config_path;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");
  app.add_option("--config", config_path, "Flat key = value file; flags override it");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a planted-cluster dataset and campaigns");
  gen_cmd->add_option("--n", gen.config.n, "Users")->capture_default_str();
  gen_cmd->add_option("--d", gen.config.d, "Dimensionality")->capture_default_str();
  gen_cmd->add_option("--clusters", gen.config.clusters)->capture_default_str();
  gen_cmd->add_option("--support", gen.config.support, "Characteristic features per cluster")
      ->capture_default_str();
  gen_cmd->add_option("--noise", gen.config.noise)->capture_default_str();
  gen_cmd->add_option("--log-mean", gen.config.log_mean)->capture_default_str();
  gen_cmd->add_option("--log-sigma", gen.config.log_sigma)->capture_default_str();
  gen_cmd->add_option("--campaigns-per-cluster", gen.config.campaigns_per_cluster)
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.config.seed)->capture_default_str();
  gen_cmd->add_option("--out-dir", gen.out_dir, "Writes dataset.txt, campaigns.txt, labels.txt")
      ->capture_default_str();

  BuildOptions bo;
  auto* build_cmd = app.add_subcommand("build", "Build a cohort assignment");
  build_cmd->add_option("--input", bo.input, "Dataset file")->required();
  build_cmd->add_option("--out", bo.out, "Assignment file (metadata goes to <out>.meta)")
      ->capture_default_str();
  build_cmd->add_option("--method", bo.method)
      ->check(CLI::IsMember({"ccws", "cws", "minhash", "signrp", "random"}))
      ->capture_default_str();
  build_cmd->add_option("--k", bo.k, "Anonymity bound K")->capture_default_str();
  build_cmd->add_option("-T,--iterations", bo.iterations, "Max CCWS iterations")
      ->capture_default_str();
  build_cmd->add_option("--p", bo.p, "pGMM power")->capture_default_str();
  build_cmd->add_option("--m", bo.m, "Hash-vector length for hash-and-sort")->capture_default_str();
  build_cmd->add_option("--seed", bo.seed)->capture_default_str();
  build_cmd->add_option("--cws-bits", bo.cws_bits, "0 or full")->capture_default_str();
  build_cmd->add_option("--stall-limit", bo.stall_limit)->capture_default_str();
  build_cmd->add_flag("--log", bo.log_iterations, "One line per CCWS iteration on stderr");

  EvalOptions eo;
  auto* eval_cmd = app.add_subcommand("eval", "Campaign recall of an assignment");
  eval_cmd->add_option("--input", eo.input, "Dataset file")->required();
  eval_cmd->add_option("--assignment", eo.assignment)->required();
  eval_cmd->add_option("--campaigns", eo.campaigns)->required();
  eval_cmd->add_option("--tau", eo.tau)->capture_default_str();
  eval_cmd->add_option("--report", eo.report, "Default <assignment>.report.csv");
  eval_cmd->add_option("--cdf", eo.cdf, "Default <assignment>.cdf.csv");

  SweepOptions so;
  auto* sweep_cmd = app.add_subcommand("sweep", "CCWS recall over a grid of p");
  sweep_cmd->add_option("--input", so.input, "Dataset file")->required();
  sweep_cmd->add_option("--campaigns", so.campaigns)->required();
  sweep_cmd->add_option("--grid", so.grid, "start:step:end or a,b,c")->capture_default_str();
  sweep_cmd->add_option("--k", so.k)->capture_default_str();
  sweep_cmd->add_option("-T,--iterations", so.iterations)->capture_default_str();
  sweep_cmd->add_option("--seed", so.seed)->capture_default_str();
  sweep_cmd->add_option("--tau", so.tau)->capture_default_str();
  sweep_cmd->add_option("--out", so.out, "CSV path (default stdout)");

  BenchOptions ben;
  auto* bench_cmd = app.add_subcommand("bench", "Build timings on generated data");
  bench_cmd->add_option("--sizes", ben.sizes)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--methods", ben.methods)->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--k", ben.k)->capture_default_str();
  bench_cmd->add_option("-T,--iterations", ben.iterations)->capture_default_str();
  bench_cmd->add_option("--p", ben.p)->capture_default_str();
  bench_cmd->add_option("--m", ben.m)->capture_default_str();
  bench_cmd->add_option("--seed", ben.seed)->capture_default_str();
  bench_cmd->add_option("--out", ben.out, "CSV path (default stdout)");

  VerifyOptions vo;
  auto* verify_cmd = app.add_subcommand("verify", "Check K-anonymity and the partition property");
  verify_cmd->add_option("--input", vo.input, "Dataset file")->required();
  verify_cmd->add_option("--assignment", vo.assignment)->required();
  verify_cmd->add_option("--k", vo.k)->capture_default_str();

  DebugHashOptions ho;
  auto* hash_cmd = app.add_subcommand("debug-hash", "Print one user's hash vector in hex");
  hash_cmd->add_option("--input", ho.input, "Dataset file")->required();
  hash_cmd->add_option("--user", ho.user)->required();
  hash_cmd->add_option("--method", ho.method)
      ->check(CLI::IsMember({"cws", "minhash", "signrp"}))
      ->capture_default_str();
  hash_cmd->add_option("--m", ho.m)->capture_default_str();
  hash_cmd->add_option("--p", ho.p)->capture_default_str();
  hash_cmd->add_option("--seed", ho.seed)->capture_default_str();
  hash_cmd->add_option("--cws-bits", ho.cws_bits)->capture_default_str();

  try {
    if (const std::string path = find_config_arg(argc, argv); !path.empty()) {
      apply_config(app, read_config(path));
    }
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? kOk : kUsage;
    }
    set_thread_count(threads);

    if (*gen_cmd) return cmd_gen(gen);
    if (*build_cmd) return cmd_build(bo);
    if (*eval_cmd) return cmd_eval(eo);
    if (*sweep_cmd) return cmd_sweep(so);
    if (*bench_cmd) return cmd_bench(ben);
    if (*verify_cmd) return cmd_verify(vo);
    if (*hash_cmd) return cmd_debug_hash(ho);
    return kUsage;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const LookupError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
}

}  // namespace ccws::cli
