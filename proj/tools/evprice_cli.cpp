// evprice: sequence generation, pricing experiments, discretization-error
// tables and MCTS grid search from a flat key=value config.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "evprice/config.hpp"
#include "evprice/demand.hpp"
#include "evprice/errors.hpp"
#include "evprice/execution.hpp"
#include "evprice/harness.hpp"
#include "evprice/rng.hpp"

namespace fs = std::filesystem;
using namespace evprice;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kContract = 3, kResource = 4 };

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::string seed, out, workers, pricers, n;
};

std::string key_reference() {
  std::ostringstream os;
  os << "\nConfig keys (file lines or --set key=value):\n";
  for (const auto& k : known_keys()) {
    std::string head = "  " + std::string(k.key);
    if (!k.default_value.empty()) head += " = " + std::string(k.default_value);
    os << head;
    if (head.size() < 40) os << std::string(40 - head.size(), ' ');
    else os << "\n" << std::string(40, ' ');
    os << k.help << "\n";
  }
  return os.str();
}

void add_common(CLI::App* sub, Common& c, bool with_run_flags) {
  sub->add_option("-c,--config", c.config_file, "key=value config file");
  sub->add_option("-s,--set", c.sets, "override one key (repeatable)");
  sub->add_option("--seed", c.seed, "root seed (key: seed)");
  sub->add_option("-o,--out", c.out, "output directory (key: out)");
  sub->add_option("-w,--workers", c.workers, "worker threads (key: workers)");
  if (with_run_flags) {
    sub->add_option("--pricers", c.pricers, "comma-separated pricers (key: pricers)");
    sub->add_option("-n,--n", c.n, "replications (key: n)");
  }
  sub->footer(key_reference());
}

KeyValueConfig load(const Common& c, const std::string& n_key) {
  KeyValueConfig cfg;
  if (!c.config_file.empty()) cfg = KeyValueConfig::from_file(c.config_file);
  for (const auto& s : c.sets) cfg.set_assignment(s);
  if (!c.seed.empty()) cfg.set("seed", c.seed);
  if (!c.out.empty()) cfg.set("out", c.out);
  if (!c.workers.empty()) cfg.set("workers", c.workers);
  if (!c.pricers.empty()) cfg.set("pricers", c.pricers);
  if (!c.n.empty()) cfg.set(n_key, c.n);
  const long long workers = cfg.get_int("workers");
  if (workers < 0 || workers > 4096) throw ConfigError("workers must be in [0, 4096]");
  set_workers(static_cast<int>(workers));
  return cfg;
}

fs::path output_dir(const KeyValueConfig& cfg) {
  const fs::path dir = cfg.get("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw ConfigError("cannot create output directory " + dir.string());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

std::string implied_error(const InstanceConfig& inst) {
  if (inst.lambda <= 0.0) return "0";
  return format_double(relative_error(inst.timesteps, inst.lambda));
}

// Resolved config as loadable key = value lines, followed by comment lines.
void write_manifest_head(std::ostream& os, const std::string& command, const KeyValueConfig& cfg) {
  os << "# evprice manifest\n# command = " << command << "\n";
  os << "# seed streams: gen/<i> sequences, train/<i> flatrate training, pricer/<i> decisions, "
        "trace/<i> tie shuffles\n";
  os << cfg.resolved();
}

int cmd_gen(const Common& c) {
  const KeyValueConfig cfg = load(c, "gen.n");
  const InstanceConfig inst = instance_config(cfg);
  const long long count = cfg.get_int("gen.n");
  if (count < 0) throw ConfigError("gen.n must be >= 0");
  const fs::path dir = output_dir(cfg);
  const std::uint64_t root = cfg.get_u64("seed");

  auto manifest = open_out(dir / "manifest.txt");
  write_manifest_head(manifest, "gen", cfg);
  manifest << "# timesteps = " << inst.timesteps << "\n";
  manifest << "# implied_relative_error = " << implied_error(inst) << "\n";
  for (long long i = 0; i < count; ++i) {
    const std::uint64_t seed = sequence_seed(root, static_cast<std::size_t>(i));
    char name[32];
    std::snprintf(name, sizeof name, "seq_%05lld.txt", i);
    auto os = open_out(dir / name);
    write_sequence(os, generate_sequence(inst, seed));
    manifest << "# file " << name << " seed = " << seed << "\n";
  }
  std::cout << "wrote " << count << " sequences to " << dir.string() << "\n";
  return kOk;
}

int cmd_run(const Common& c) {
  const KeyValueConfig cfg = load(c, "n");
  const ExperimentSpec spec = experiment_spec(cfg);
  const fs::path dir = output_dir(cfg);
  const ExperimentResult result = run_experiment(spec);

  {
    auto os = open_out(dir / "results.csv");
    write_results_csv(os, result, spec.timing);
  }
  write_results_csv(std::cout, result, spec.timing);
  if (spec.keep_traces) {
    auto os = open_out(dir / "traces.txt");
    write_traces(os, result, spec.base.prices);
  }

  auto manifest = open_out(dir / "manifest.txt");
  write_manifest_head(manifest, "run", cfg);
  for (double value : spec.points()) {
    const InstanceConfig inst = spec.point_config(value);
    manifest << "# point " << (std::isnan(value) ? std::string("-") : format_double(value))
             << " timesteps = " << inst.timesteps
             << " implied_relative_error = " << implied_error(inst) << "\n";
  }
  for (const auto& row : result.rows) {
    if (row.flatrate_rate)
      manifest << "# flatrate_rate " << row.pricer << " = " << format_double(*row.flatrate_rate) << "\n";
    if (row.vi_expected_value)
      manifest << "# vi_expected_value = " << format_double(*row.vi_expected_value) << "\n";
  }
  return kOk;
}

int cmd_error_table(const Common& c) {
  const KeyValueConfig cfg = load(c, "n");
  std::vector<long long> ks;
  for (const auto& s : cfg.get_list("error.k")) {
    const double v = std::stod(s);
    if (v < 1 || v != std::floor(v)) throw ConfigError("error.k values must be positive integers");
    ks.push_back(static_cast<long long>(v));
  }
  const std::vector<double> lambdas = cfg.get_doubles("error.lambda");
  if (ks.empty() || lambdas.empty()) throw ConfigError("error.k and error.lambda must be non-empty");
  for (double l : lambdas)
    if (!(l >= 0.0)) throw ConfigError("error.lambda values must be >= 0");

  std::ostringstream csv;
  csv << "k,lambda,err1,err2,relative\n";
  for (double l : lambdas) {
    for (long long k : ks) {
      const ErrorReport r = error_report(k, l);
      csv << k << ',' << format_double(l) << ',' << format_double(r.err_intervals) << ','
          << format_double(r.err_missed) << ',' << format_double(r.relative) << '\n';
    }
  }
  const fs::path dir = output_dir(cfg);
  auto os = open_out(dir / "error_table.csv");
  os << csv.str();
  std::cout << csv.str();
  return kOk;
}

int cmd_grid_search(const Common& c) {
  const KeyValueConfig cfg = load(c, "n");
  const ExperimentSpec spec = experiment_spec(cfg);
  std::vector<int> depth, iterations;
  for (double d : cfg.get_doubles("grid.depth")) depth.push_back(static_cast<int>(d));
  for (double m : cfg.get_doubles("grid.iterations")) iterations.push_back(static_cast<int>(m));
  const GridSearchResult result =
      grid_search(spec, cfg.get_doubles("grid.exploration"), depth, iterations);
  const fs::path dir = output_dir(cfg);
  {
    auto os = open_out(dir / "grid_search.csv");
    write_grid_csv(os, result, spec.timing);
  }
  write_grid_csv(std::cout, result, spec.timing);
  const GridCell& best = result.cells[result.best];
  auto manifest = open_out(dir / "manifest.txt");
  write_manifest_head(manifest, "grid-search", cfg);
  manifest << "# best exploration = " << format_double(best.exploration)
           << " depth = " << best.max_depth << " iterations = " << best.iterations << "\n";
  std::cout << "best: exploration=" << format_double(best.exploration) << " depth=" << best.max_depth
            << " iterations=" << best.iterations << " revenue_mean=" << format_double(best.revenue.mean)
            << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic pricing of EV charging reservations"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 2 config error, 3 contract violation, 4 resource guard.");

  Common c;
  auto* gen = app.add_subcommand("gen", "write request sequences and a manifest");
  add_common(gen, c, false);
  gen->add_option("-n,--n", c.n, "number of sequences (key: gen.n)");
  auto* run = app.add_subcommand("run", "simulate pricers on paired sequences, write results.csv");
  add_common(run, c, true);
  auto* err = app.add_subcommand("error-table", "discretization error per (k, lambda)");
  add_common(err, c, false);
  auto* grid = app.add_subcommand("grid-search", "MCTS hyperparameter grid search");
  add_common(grid, c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(c);
    if (run->parsed()) return cmd_run(c);
    if (err->parsed()) return cmd_error_table(c);
    if (grid->parsed()) return cmd_grid_search(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kContract;
  } catch (const ResourceGuard& e) {
    std::cerr << "resource guard: " << e.what() << "\n";
    return kResource;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
