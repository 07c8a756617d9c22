#include "evprice/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>

#include "evprice/config.hpp"
#include "evprice/errors.hpp"
#include "evprice/exact_sum.hpp"
#include "evprice/flatrate.hpp"
#include "evprice/oracle.hpp"
#include "evprice/value_iteration.hpp"

namespace evprice {

SimTrace simulate(Pricer& pricer, const RequestSequence& sequence, const TransitionModel& model,
                  std::uint64_t pricer_seed, std::uint64_t trace_seed) {
  if (sequence.n_slots != model.slots().n_slots())
    throw ConfigError("sequence was generated for " + std::to_string(sequence.n_slots) +
                      " slots, model has " + std::to_string(model.slots().n_slots()));
  const auto start = std::chrono::steady_clock::now();
  const auto& reqs = sequence.requests;

  // arrival order; runs of identical timestamps are shuffled
  std::vector<std::size_t> order(reqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (reqs[a].arrival_step != reqs[b].arrival_step) return reqs[a].arrival_step < reqs[b].arrival_step;
    return reqs[a].arrival_hours < reqs[b].arrival_hours;
  });
  Rng tie_rng = make_rng(trace_seed);
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && reqs[order[j]].arrival_step == reqs[order[i]].arrival_step &&
           reqs[order[j]].arrival_hours == reqs[order[i]].arrival_hours)
      ++j;
    if (j - i > 1) std::shuffle(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j), tie_rng);
    i = j;
  }

  pricer.begin_sequence(sequence, pricer_seed);
  SimTrace trace;
  trace.records.reserve(reqs.size());
  CapacityVector capacity = model.initial_capacity();
  ExactSum revenue;
  for (std::size_t idx : order) {
    const Request& r = reqs[idx];
    if (r.arrival_step < 0 || r.arrival_step >= model.horizon())
      throw ConfigError("request arrives outside the model's timestep range");
    const std::size_t product = model.products().index_of(r.product);
    const State state{capacity, r.arrival_step, product};
    TraceRecord rec;
    rec.request = idx;
    rec.arrival_step = r.arrival_step;
    rec.product = r.product;
    rec.feasible = model.pending_feasible(state);
    rec.offered = rec.feasible ? pricer.decide(state, idx) : Action::reject();
    if (!rec.offered.is_reject()) {
      if (static_cast<std::size_t>(rec.offered.index()) >= model.prices().size())
        throw ContractViolation(pricer.name() + " offered an action outside the price grid");
      const double price = model.total_price(product, rec.offered);
      if (price <= r.budget) {
        rec.accepted = true;
        rec.reward = price;
        capacity.reserve(r.product);
        revenue.add(price);
        trace.utilization_hours += r.product.duration_hours(model.slots());
        ++trace.accepted;
      }
    }
    trace.records.push_back(rec);
  }
  trace.requests = static_cast<int>(reqs.size());
  trace.revenue = revenue.value();
  trace.final_capacity = std::move(capacity);
  trace.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::slot_length: return "slot_length";
    case SweepAxis::demand: return "demand";
    case SweepAxis::timesteps: return "timesteps";
  }
  return "none";
}

SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "none") return SweepAxis::none;
  if (name == "slot_length") return SweepAxis::slot_length;
  if (name == "demand") return SweepAxis::demand;
  if (name == "timesteps") return SweepAxis::timesteps;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

namespace {

bool known_pricer(const std::string& name) {
  return name == "mcts" || name == "vi" || name == "flatrate" || name == "oracle";
}

}  // namespace

void ExperimentSpec::validate() const {
  if (replications < 1) throw ConfigError("replication count must be >= 1");
  if (pricers.empty()) throw ConfigError("at least one pricer is required");
  for (const auto& p : pricers)
    if (!known_pricer(p)) throw ConfigError("unknown pricer '" + p + "'");
  if (axis != SweepAxis::none && values.empty())
    throw ConfigError("sweep axis " + to_string(axis) + " needs sweep values");
  if (flatrate_training < 1 && !flatrate_rate)
    throw ConfigError("flatrate training needs at least one sequence");
  if ((!vi_policy_in.empty() || !vi_policy_out.empty()) && points().size() != 1)
    throw ConfigError("VI policy files need a single sweep point");
  mcts.validate();
  base.validate();
}

InstanceConfig ExperimentSpec::point_config(double value) const {
  InstanceConfig cfg = base;
  switch (axis) {
    case SweepAxis::none:
      break;
    case SweepAxis::slot_length: {
      const double ratio = cfg.slots.horizon_hours() / value;
      const long long n = std::llround(ratio);
      if (!(value > 0.0) || n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
        throw ConfigError("slot length " + format_double(value) + " does not divide the horizon");
      cfg.slots = SlotGrid(static_cast<int>(n), value);
      break;
    }
    case SweepAxis::demand:
      if (!(value >= 0.0)) throw ConfigError("demand sweep values must be >= 0");
      cfg.lambda = value;
      break;
    case SweepAxis::timesteps:
      if (value < 1 || value != std::floor(value))
        throw ConfigError("timestep sweep values must be positive integers");
      cfg.timesteps = static_cast<int>(value);
      break;
  }
  if (auto_timesteps && axis != SweepAxis::timesteps)
    cfg.timesteps = evprice::auto_timesteps(cfg.lambda, rel_error, cfg.slots.n_slots());
  cfg.validate();
  return cfg;
}

std::vector<double> ExperimentSpec::points() const {
  if (axis == SweepAxis::none) return {std::nan("")};
  return values;
}

ExperimentSpec experiment_spec(const KeyValueConfig& cfg) {
  ExperimentSpec spec;
  spec.base = instance_config(cfg);
  spec.auto_timesteps = cfg.get_int("demand.timesteps") == 0;
  spec.rel_error = cfg.get_double("demand.rel_error");
  spec.axis = parse_sweep_axis(cfg.get("sweep.axis"));
  spec.values = cfg.get_doubles("sweep.values");
  spec.pricers = cfg.get_list("pricers");
  const long long n = cfg.get_int("n");
  const long long train = cfg.get_int("flatrate.train");
  if (n < 1 || n > 100'000'000) throw ConfigError("n must be in [1, 1e8]");
  if (train < 0 || train > 100'000'000) throw ConfigError("flatrate.train must be in [0, 1e8]");
  spec.replications = static_cast<int>(n);
  spec.flatrate_training = static_cast<int>(train);
  if (!cfg.get("flatrate.rate").empty()) spec.flatrate_rate = cfg.get_double("flatrate.rate");

  const std::string preset = cfg.get("mcts.preset");
  if (preset == "standard") spec.mcts = MctsParams::standard();
  else if (preset == "light") spec.mcts = MctsParams::light();
  else throw ConfigError("unknown mcts.preset '" + preset + "'");
  if (!cfg.get("mcts.iterations").empty())
    spec.mcts.iterations = static_cast<int>(cfg.get_int("mcts.iterations"));
  if (!cfg.get("mcts.depth").empty()) spec.mcts.max_depth = static_cast<int>(cfg.get_int("mcts.depth"));
  if (!cfg.get("mcts.exploration").empty()) spec.mcts.exploration = cfg.get_double("mcts.exploration");
  const std::string sign = cfg.get("mcts.ucb_sign");
  if (sign == "plus") spec.mcts.ucb_sign = +1;
  else if (sign == "minus") spec.mcts.ucb_sign = -1;
  else throw ConfigError("mcts.ucb_sign must be plus or minus");
  spec.mcts.reuse_tree = cfg.get_bool("mcts.reuse");

  spec.vi_max_states = cfg.get_u64("vi.max_states");
  spec.vi_policy_in = cfg.get("vi.policy_in");
  spec.vi_policy_out = cfg.get("vi.policy_out");
  spec.seed = cfg.get_u64("seed");
  spec.timing = cfg.get_bool("timing");
  spec.keep_traces = cfg.get_bool("traces");
  spec.validate();
  return spec;
}

std::uint64_t sequence_seed(std::uint64_t root, std::size_t replication) {
  return derive_seed(root, "gen", replication);
}

namespace {

Action grid_action_for_rate(const PriceGrid& grid, double rate) {
  for (std::size_t a = 0; a < grid.size(); ++a)
    if (std::abs(grid.rates()[a] - rate) <= 1e-9) return Action(static_cast<int>(a));
  throw ConfigError("flatrate.rate " + format_double(rate) + " is not on the price grid");
}

template <typename Body>
void run_indexed(std::size_t n, Execution exec, Body&& body) {
  std::exception_ptr failure;
  const auto count = static_cast<long long>(n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(evprice_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  } else {
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
  }
  if (failure) std::rethrow_exception(failure);
}

void summarize_row(ResultRow& row, const std::vector<SimTrace>& traces, bool keep) {
  std::vector<double> util, acc, reqs, rt;
  for (const auto& t : traces) {
    row.revenues.push_back(t.revenue);
    util.push_back(t.utilization_hours);
    acc.push_back(t.accepted);
    reqs.push_back(t.requests);
    rt.push_back(t.runtime_seconds);
  }
  row.revenue = summarize(row.revenues);
  row.utilization_mean = summarize(util).mean;
  row.accepted_mean = summarize(acc).mean;
  row.requests_mean = summarize(reqs).mean;
  row.runtime_mean = summarize(rt).mean;
  if (keep) row.traces = traces;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, Execution exec) {
  spec.validate();
  ExperimentResult result;
  const auto n = static_cast<std::size_t>(spec.replications);

  for (double value : spec.points()) {
    const InstanceConfig cfg = spec.point_config(value);
    const TransitionModel model = TransitionModel::from_instance(cfg);

    std::vector<RequestSequence> sequences(n);
    run_indexed(n, exec, [&](std::size_t i) {
      sequences[i] = generate_sequence(cfg, sequence_seed(spec.seed, i));
    });

    for (const auto& name : spec.pricers) {
      ResultRow row;
      row.axis = spec.axis;
      row.value = value;
      row.pricer = name;
      row.timesteps = cfg.timesteps;

      std::unique_ptr<ViPolicy> policy;
      Action flat_rate;
      if (name == "vi") {
        try {
          if (!spec.vi_policy_in.empty()) {
            std::ifstream in(spec.vi_policy_in);
            if (!in) throw ConfigError("cannot open VI policy " + spec.vi_policy_in);
            policy = std::make_unique<ViPolicy>(load_policy(in, model));
          } else {
            policy = std::make_unique<ViPolicy>(value_iteration(model, spec.vi_max_states, exec));
          }
        } catch (const ResourceGuard&) {
          row.status = "skipped: memory guard";
          result.rows.push_back(std::move(row));
          continue;
        }
        row.vi_expected_value = policy->expected_initial_value(model);
        if (!spec.vi_policy_out.empty()) {
          std::ofstream out(spec.vi_policy_out);
          if (!out) throw ConfigError("cannot write VI policy " + spec.vi_policy_out);
          save_policy(out, *policy);
        }
      } else if (name == "flatrate") {
        if (spec.flatrate_rate) {
          flat_rate = grid_action_for_rate(cfg.prices, *spec.flatrate_rate);
        } else {
          std::vector<RequestSequence> training(static_cast<std::size_t>(spec.flatrate_training));
          run_indexed(training.size(), exec, [&](std::size_t i) {
            training[i] = generate_sequence(cfg, derive_seed(spec.seed, "train", i));
          });
          flat_rate = train_flatrate(training, cfg.prices, cfg.initial_capacity(), cfg.slots,
                                     cfg.timesteps)
                          .rate;
        }
        row.flatrate_rate = cfg.prices.rate(flat_rate);
      }

      std::vector<SimTrace> traces(n);
      run_indexed(n, exec, [&](std::size_t i) {
        std::unique_ptr<Pricer> pricer;
        if (name == "mcts") pricer = std::make_unique<MctsPricer>(model, spec.mcts);
        else if (name == "vi") pricer = std::make_unique<ViPricer>(*policy);
        else if (name == "flatrate") pricer = std::make_unique<FlatratePricer>(flat_rate);
        else pricer = std::make_unique<OraclePricer>(cfg.initial_capacity(), cfg.prices, cfg.slots, cfg.timesteps);
        traces[i] = simulate(*pricer, sequences[i], model, derive_seed(spec.seed, "pricer", i),
                             derive_seed(spec.seed, "trace", i));
      });
      summarize_row(row, traces, spec.keep_traces);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_results_csv(std::ostream& os, const ExperimentResult& result, bool timing) {
  os << "sweep_axis,sweep_value,pricer,n,revenue_mean,revenue_ci95,utilization_mean_h,"
        "accepted_mean,requests_mean,runtime_mean_s,status\n";
  for (const auto& row : result.rows) {
    os << to_string(row.axis) << ',';
    if (row.axis != SweepAxis::none) os << format_double(row.value);
    os << ',' << row.pricer << ',';
    if (row.status != "ok") {
      os << "0,,,,,,," << row.status << '\n';
      continue;
    }
    os << row.revenue.n << ',' << format_double(row.revenue.mean) << ','
       << format_double(row.revenue.ci95) << ',' << format_double(row.utilization_mean) << ','
       << format_double(row.accepted_mean) << ',' << format_double(row.requests_mean) << ',';
    if (timing) os << format_double(row.runtime_mean);
    os << ',' << row.status << '\n';
  }
}

void write_traces(std::ostream& os, const ExperimentResult& result, const PriceGrid& grid) {
  os << "# sweep_value pricer replication request arrival_step first_slot length offered_rate "
        "accepted reward\n";
  for (const auto& row : result.rows) {
    for (std::size_t rep = 0; rep < row.traces.size(); ++rep) {
      for (const auto& rec : row.traces[rep].records) {
        os << (row.axis == SweepAxis::none ? std::string("-") : format_double(row.value)) << ' '
           << row.pricer << ' ' << rep << ' ' << rec.request << ' ' << rec.arrival_step << ' '
           << rec.product.first_slot() << ' ' << rec.product.length() << ' '
           << (rec.offered.is_reject() ? std::string("inf") : format_double(grid.rate(rec.offered)))
           << ' ' << (rec.accepted ? 1 : 0) << ' ' << format_double(rec.reward) << '\n';
      }
    }
  }
}

GridSearchResult grid_search(const ExperimentSpec& spec, const std::vector<double>& exploration,
                             const std::vector<int>& depth, const std::vector<int>& iterations,
                             Execution exec) {
  if (exploration.empty() || depth.empty() || iterations.empty())
    throw ConfigError("grid search needs non-empty exploration, depth and iteration grids");
  GridSearchResult out;
  ExperimentSpec cell_spec = spec;
  cell_spec.pricers = {"mcts"};
  cell_spec.axis = SweepAxis::none;
  cell_spec.values.clear();
  for (double c : exploration) {
    for (int d : depth) {
      for (int mu : iterations) {
        cell_spec.mcts.exploration = c;
        cell_spec.mcts.max_depth = d;
        cell_spec.mcts.iterations = mu;
        const auto res = run_experiment(cell_spec, exec);
        const auto& row = res.rows.front();
        out.cells.push_back(GridCell{c, d, mu, row.revenue, row.runtime_mean, row.revenues});
      }
    }
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    const auto& a = out.cells[i];
    const auto& b = out.cells[out.best];
    if (a.revenue.mean > b.revenue.mean ||
        (a.revenue.mean == b.revenue.mean && a.runtime_mean < b.runtime_mean))
      out.best = i;
  }
  return out;
}

void write_grid_csv(std::ostream& os, const GridSearchResult& result, bool timing) {
  os << "exploration,depth,iterations,n,revenue_mean,revenue_ci95,runtime_mean_s,best\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    os << format_double(c.exploration) << ',' << c.max_depth << ',' << c.iterations << ','
       << c.revenue.n << ',' << format_double(c.revenue.mean) << ','
       << format_double(c.revenue.ci95) << ',';
    if (timing) os << format_double(c.runtime_mean);
    os << ',' << (i == result.best ? 1 : 0) << '\n';
  }
}

}  // namespace evprice
