// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <unordered_set>
#include <sstream>
#include <string>
#include <vector>

#include "evprice/demand.hpp"
#include "evprice/harness.hpp"
#include "evprice/oracle.hpp"
#include "evprice/pricing_mdp.hpp"
#include "evprice/value_iteration.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace evprice;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Monte-Carlo error estimates agree with the closed forms within 3 SE.
Verdict error_formulas() {
  double worst = 0.0;
  std::string where;
  bool closed_forms_match = true;
  Rng rng = make_rng(derive_seed(7, "acceptance-mc"));
  for (double lambda : {1.0, 8.0, 24.0, 240.0}) {
    const long long base = static_cast<long long>(std::ceil(lambda));
    for (long long k : {base, static_cast<long long>(2 * lambda), static_cast<long long>(8 * lambda),
                        static_cast<long long>(64 * lambda)}) {
      const double x = std::exp(-lambda / static_cast<double>(k));
      const double e1 = static_cast<double>(k) - (static_cast<double>(k) + lambda) * x;
      const double e2 = lambda * x + (lambda - static_cast<double>(k)) * (1.0 - x);
      if (std::abs(err_intervals(k, lambda) - e1) > 1e-9 * std::max(1.0, e1) ||
          std::abs(err_missed(k, lambda) - e2) > 1e-9 * std::max(1.0, e2))
        closed_forms_match = false;
      const McErrorEstimate mc = mc_error_oracle(k, lambda, 100'000, rng);
      const double z1 = std::abs(mc.mean.err_intervals - e1) / std::max(mc.se_intervals, 1e-300);
      const double z2 = std::abs(mc.mean.err_missed - e2) / std::max(mc.se_missed, 1e-300);
      for (double z : {z1, z2}) {
        if (z > worst) {
          worst = z;
          where = "lambda=" + format_double(lambda) + " k=" + std::to_string(k);
        }
      }
    }
  }
  return {worst <= 3.0 && closed_forms_match,
          "worst deviation " + fmt("%.2f", worst) + " SE at " + where + " (tol 3 SE, 1e5 paths)" +
              (closed_forms_match ? "" : "; closed forms disagree")};
}

// 2. k for lambda = 24 at 6% relative error.
Verdict paper_k() {
  const long long k = min_timesteps(24.0, 0.06);
  const double rel191 = relative_error(191, 24.0);
  return {k == 192 && rel191 > 0.06,
          "min_timesteps(24, 0.06) = " + std::to_string(k) + ", relative_error(191, 24) = " +
              fmt("%.6f", rel191)};
}

double expected_next_vi(const ViPolicy& policy, const evtest::SmallSpec& sp,
                        const CapacityVector& cap, int t) {
  if (t >= sp.k) return 0.0;
  double total = 0.0, none = 1.0;
  for (std::size_t i = 0; i < sp.lambdas.size(); ++i) {
    const double pr = sp.lambdas[i] / sp.k;
    none -= pr;
    total += pr * policy.value(State{cap, t, i});
  }
  return total + none * policy.value(State{cap, t, std::nullopt});
}

// 3. VI against memoized expectimax, plus one-step policy improvement.
Verdict vi_exactness() {
  const evtest::SmallSpec sp;
  const TransitionModel model = evtest::build_model(sp);
  const ViPolicy policy = value_iteration(model, 1'000'000);
  evtest::Expectimax brute(sp);
  const double v_vi = policy.expected_initial_value(model);
  const double v_bf = brute.initial_value();
  const double gap = std::abs(v_vi - v_bf);

  double worst_gain = -1e300;
  std::size_t checked = 0;
  for (const State& s : enumerate_states(model, 1'000'000)) {
    std::vector<int> cap(s.capacity.remaining().begin(), s.capacity.remaining().end());
    const int pend = s.pending ? static_cast<int>(*s.pending) : -1;
    const double keep = expected_next_vi(policy, sp, s.capacity, s.t + 1);
    std::vector<double> q{keep};
    if (brute.sellable(cap, s.t, pend)) {
      const auto after = brute.after_sale(cap, pend);
      const double sold = expected_next_vi(policy, sp, CapacityVector(after), s.t + 1);
      for (int a = 0; a < static_cast<int>(sp.rates.size()); ++a) {
        const double pa = brute.p_acc(sp.rates[static_cast<std::size_t>(a)]);
        q.push_back(pa * (brute.price(pend, a) + sold) + (1.0 - pa) * keep);
      }
    }
    const double v = policy.value(s);
    for (double qa : q) worst_gain = std::max(worst_gain, qa - v);
    ++checked;
  }
  return {gap <= 1e-9 && worst_gain <= 1e-9,
          "|V_vi - V_expectimax| = " + fmt("%.3g", gap) + " (tol 1e-9); best one-step gain " +
              fmt("%.3g", worst_gain) + " over " + std::to_string(checked) + " states (tol 1e-9)"};
}

// 4. Branch-and-bound against 2^m enumeration.
Verdict oracle_exactness() {
  Rng rng(20240601);
  const std::vector<double> rates = [] {
    std::vector<double> r;
    for (int i = 1; i <= 30; ++i) r.push_back(i / 10.0);
    return r;
  }();
  const PriceGrid grid(rates);
  int mismatches = 0;
  std::size_t largest = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int n = std::uniform_int_distribution<int>(2, 6)(rng);
    const int capacity = std::uniform_int_distribution<int>(1, 3)(rng);
    const int m = std::uniform_int_distribution<int>(0, 18)(rng);
    const int k = 4 * n;
    const double slot_hours = 24.0 / n;
    RequestSequence seq;
    seq.n_slots = n;
    std::vector<int> steps;
    for (int i = 0; i < m; ++i) steps.push_back(std::uniform_int_distribution<int>(0, k - 1)(rng));
    std::sort(steps.begin(), steps.end());
    for (int i = 0; i < m; ++i) {
      const int first = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const int len = std::uniform_int_distribution<int>(1, n - first)(rng);
      const double rate = std::uniform_real_distribution<double>(0.05, 2.5)(rng);
      Request r{Product(first, len, n), steps[static_cast<std::size_t>(i)],
                steps[static_cast<std::size_t>(i)] * 24.0 / k, rate * len * slot_hours};
      seq.requests.push_back(r);
    }
    largest = std::max(largest, seq.requests.size());
    const auto best = evtest::exhaustive_best(seq, capacity, rates, slot_hours, k);
    const OracleResult res =
        oracle(seq, CapacityVector::uniform(n, capacity), grid, SlotGrid(n, slot_hours), k);
    if (res.revenue != std::ldexp(static_cast<double>(best), -64)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " of 200 instances differ (up to " +
                               std::to_string(largest) + " requests, exact comparison)"};
}

ExperimentSpec default_spec() {
  ExperimentSpec spec;
  spec.pricers = {"oracle", "mcts", "flatrate"};
  spec.replications = 100;
  spec.flatrate_training = 100;
  spec.seed = 1;
  spec.timing = false;
  return spec;
}

ExperimentSpec six_hour_spec() {
  ExperimentSpec spec = default_spec();
  spec.base.slots = SlotGrid(4, 6.0);
  spec.pricers = {"oracle", "vi", "mcts", "flatrate"};
  return spec;
}

const ResultRow& row_of(const ExperimentResult& r, const std::string& pricer) {
  for (const auto& row : r.rows)
    if (row.pricer == pricer) return row;
  throw std::runtime_error("missing row " + pricer);
}

struct Runs {
  ExperimentResult standard;
  ExperimentResult six_hour;
};

const Runs& runs() {
  static const Runs r{run_experiment(default_spec()), run_experiment(six_hour_spec())};
  return r;
}

// 5. Every pricer's revenue is bounded by the oracle on its sequence.
Verdict dominance() {
  int violations = 0, replay_mismatch = 0, compared = 0;
  const ExperimentSpec spec = default_spec();
  for (const ExperimentResult* res : {&runs().standard, &runs().six_hour}) {
    const ResultRow& orc = row_of(*res, "oracle");
    for (const auto& row : res->rows) {
      if (row.pricer == "oracle") continue;
      for (std::size_t i = 0; i < row.revenues.size(); ++i, ++compared)
        if (row.revenues[i] > orc.revenues[i]) ++violations;
    }
  }
  // the oracle column must be the true optimum, not just the replay
  const ResultRow& orc = row_of(runs().standard, "oracle");
  for (std::size_t i = 0; i < orc.revenues.size(); ++i) {
    const RequestSequence seq = generate_sequence(spec.base, sequence_seed(spec.seed, i));
    const OracleResult direct = oracle(seq, spec.base.initial_capacity(), spec.base.prices,
                                       spec.base.slots, spec.base.timesteps);
    if (direct.revenue != orc.revenues[i]) ++replay_mismatch;
  }
  return {violations == 0 && replay_mismatch == 0,
          std::to_string(violations) + " violations in " + std::to_string(compared) +
              " paired comparisons (default config and 6 h slots, mcts/flatrate/vi); " +
              std::to_string(replay_mismatch) + " oracle replay mismatches"};
}

// 6. Revenue ordering with margins.
Verdict ordering() {
  const double mcts = row_of(runs().standard, "mcts").revenue.mean;
  const double flat = row_of(runs().standard, "flatrate").revenue.mean;
  const double mcts6 = row_of(runs().six_hour, "mcts").revenue.mean;
  const double vi6 = *row_of(runs().six_hour, "vi").vi_expected_value;
  const double r1 = mcts / flat, r2 = mcts6 / vi6;
  return {r1 >= 1.05 && r2 >= 0.90,
          "mcts/flatrate = " + fmt("%.4f", r1) + " (need >= 1.05; " + fmt("%.3f", mcts) + " vs " +
              fmt("%.3f", flat) + "), mcts/VI on 6 h slots = " + fmt("%.4f", r2) +
              " (need >= 0.90; " + fmt("%.3f", mcts6) + " vs " + fmt("%.3f", vi6) + ")"};
}

// 7. Exact transition laws close and match the sampler.
Verdict transition_closure() {
  const evtest::SmallSpec sp;
  const TransitionModel model = evtest::build_model(sp);
  evtest::Expectimax ref(sp);
  double worst_sum = 0.0, worst_prob = 0.0;
  std::size_t pairs = 0;
  const auto states = enumerate_states(model, 1'000'000);
  for (const State& s : states) {
    for (Action a : model.legal_actions(s)) {
      const auto dist = transition_distribution(model, s, a);
      double sum = 0.0;
      for (const auto& o : dist) sum += o.probability;
      worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      // independent probability of each branch
      const double pa = a.is_reject() ? 0.0 : ref.p_acc(sp.rates[static_cast<std::size_t>(a.index())]);
      for (const auto& o : dist) {
        const bool sold = !(o.next.capacity == s.capacity);
        double pr = sold ? pa : 1.0 - pa;
        if (o.next.t < sp.k) {
          double p_next = 1.0;
          for (double l : sp.lambdas) p_next -= l / sp.k;
          if (o.next.pending) p_next = sp.lambdas[*o.next.pending] / sp.k;
          pr *= p_next;
        }
        worst_prob = std::max(worst_prob, std::abs(pr - o.probability));
      }
      ++pairs;
    }
  }

  // sampler vs exact law on a spread of (state, action) pairs
  Rng rng = make_rng(derive_seed(11, "acceptance-transitions"));
  double worst_z = 0.0;
  int unknown = 0, tested = 0;
  for (std::size_t idx = 0; idx < states.size(); idx += states.size() / 7) {
    const State& s = states[idx];
    for (Action a : model.legal_actions(s)) {
      if (!(a.is_reject() || a.index() == 1)) continue;
      const auto dist = transition_distribution(model, s, a);
      std::vector<long> hits(dist.size(), 0);
      const long draws = 100'000;
      for (long d = 0; d < draws; ++d) {
        const Transition tr = sample_transition(model, s, a, rng);
        std::size_t j = 0;
        while (j < dist.size() && !(dist[j].next == tr.next && dist[j].reward == tr.reward)) ++j;
        if (j == dist.size()) ++unknown;
        else ++hits[j];
      }
      for (std::size_t j = 0; j < dist.size(); ++j) {
        const double p = dist[j].probability;
        const double se = std::sqrt(p * (1.0 - p) / draws);
        const double f = static_cast<double>(hits[j]) / draws;
        if (se > 0) worst_z = std::max(worst_z, std::abs(f - p) / se);
      }
      ++tested;
    }
  }
  return {worst_sum <= 1e-12 && worst_prob <= 1e-12 && worst_z <= 3.0 && unknown == 0,
          "max |sum - 1| = " + fmt("%.2g", worst_sum) + " over " + std::to_string(pairs) +
              " state-action pairs (tol 1e-12), max branch error " + fmt("%.2g", worst_prob) +
              "; sampled law worst " + fmt("%.2f", worst_z) + " sigma over " +
              std::to_string(tested) + " pairs x 1e5 draws (tol 3)"};
}

std::uint64_t counted_states(int n, int c0, int k) {
  std::uint64_t caps = 1;
  for (int j = 0; j < n; ++j) caps *= static_cast<std::uint64_t>(c0 + 1);
  std::uint64_t products = 0;
  for (int s = 0; s < n; ++s)
    for (int e = s; e < n; ++e) ++products;
  return static_cast<std::uint64_t>(k) * caps * (products + 1);
}

// 8. State enumeration matches the closed form and is linear in k.
Verdict state_count_check() {
  struct Cfg { int n, c0, k; };
  bool ok = true;
  std::ostringstream detail;
  for (const Cfg& c : {Cfg{1, 1, 2}, Cfg{2, 2, 4}, Cfg{3, 1, 6}}) {
    std::uint64_t enumerated[2]{};
    for (int mult = 1; mult <= 2; ++mult) {
      const int k = c.k * mult;
      evtest::SmallSpec sp;
      sp.n_slots = c.n;
      sp.c0 = c.c0;
      sp.k = k;
      sp.lambdas.assign(static_cast<std::size_t>(c.n * (c.n + 1) / 2), 0.1);
      const auto states = enumerate_states(evtest::build_model(sp), 10'000'000);
      std::unordered_set<State, StateHash> distinct(states.begin(), states.end());
      enumerated[mult - 1] = states.size();
      ok = ok && distinct.size() == states.size() &&
           states.size() == state_count_formula(k, c.c0, c.n) &&
           states.size() == counted_states(c.n, c.c0, k);
    }
    ok = ok && enumerated[1] == 2 * enumerated[0];
    detail << "(n=" << c.n << ", c0=" << c.c0 << ", k=" << c.k << ") -> " << enumerated[0]
           << ", 2k -> " << enumerated[1] << "; ";
  }
  return {ok, detail.str() + "formula and explicit count agree"};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EVPRICE_CLI) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// 9. `run` output is byte-identical across worker counts.
Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "evprice_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "seed = 99\nn = 16\npricers = oracle,vi,mcts,flatrate\nmcts.preset = light\n"
           "slots.length_h = 6\ndemand.timesteps = 96\nsweep.axis = demand\n"
           "sweep.values = 12,24\nflatrate.train = 20\ntraces = on\ntiming = off\n";
  }
  const int many = std::max(4, max_workers());
  const std::string base = "run --config " + (dir / "run.cfg").string();
  const int rc1 = run_cli(base + " --workers 1 --out " + (dir / "w1").string());
  const int rc2 = run_cli(base + " --workers " + std::to_string(many) + " --out " + (dir / "wn").string());
  const int rc3 = run_cli(base + " --workers 1 --out " + (dir / "w1b").string());
  const std::string a = slurp(dir / "w1" / "results.csv");
  const bool same_csv = !a.empty() && a == slurp(dir / "wn" / "results.csv") &&
                        a == slurp(dir / "w1b" / "results.csv");
  const bool same_traces = slurp(dir / "w1" / "traces.txt") == slurp(dir / "wn" / "traces.txt");
  return {rc1 == 0 && rc2 == 0 && rc3 == 0 && same_csv && same_traces,
          "workers 1 vs " + std::to_string(many) + ": results.csv " +
              (same_csv ? "identical" : "DIFFERENT") + ", traces " +
              (same_traces ? "identical" : "DIFFERENT") + ", exit codes " + std::to_string(rc1) +
              "/" + std::to_string(rc2) + "/" + std::to_string(rc3)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"discretization-error formulas", error_formulas},
      {"paper-anchored timestep count", paper_k},
      {"value iteration exactness", vi_exactness},
      {"oracle exactness", oracle_exactness},
      {"oracle dominance", dominance},
      {"revenue ordering with margins", ordering},
      {"transition closure", transition_closure},
      {"state-count formula", state_count_check},
      {"run determinism across workers", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::printf("criterion %zu %s %s: %s [%.1f s]\n", i + 1, v.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
