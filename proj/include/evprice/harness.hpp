#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evprice/config.hpp"
#include "evprice/execution.hpp"
#include "evprice/market.hpp"
#include "evprice/mcts.hpp"
#include "evprice/pricer.hpp"
#include "evprice/pricing_mdp.hpp"
#include "evprice/stats.hpp"

namespace evprice {

struct TraceRecord {
  std::size_t request = 0;
  int arrival_step = 0;
  Product product{0, 1, 1};
  bool feasible = false;
  Action offered;
  bool accepted = false;
  double reward = 0.0;
};

struct SimTrace {
  std::vector<TraceRecord> records;
  CapacityVector final_capacity;
  double revenue = 0.0;
  double utilization_hours = 0.0;   ///< accepted reservation hours
  int accepted = 0;
  int requests = 0;
  double runtime_seconds = 0.0;
};

/// Replays the seller-customer protocol: requests in arrival order
/// (exact timestamp ties shuffled with `trace_seed`), infeasible requests
/// rejected, otherwise the pricer's offer accepted iff price <= budget.
/// Several requests in one timestep are priced from the same t with the
/// capacity left by the earlier ones. Throws ConfigError when the sequence
/// was generated for a different slot grid.
SimTrace simulate(Pricer& pricer, const RequestSequence& sequence, const TransitionModel& model,
                  std::uint64_t pricer_seed = 0, std::uint64_t trace_seed = 0);

enum class SweepAxis { none, slot_length, demand, timesteps };

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& name);

struct ExperimentSpec {
  InstanceConfig base;
  /// Re-derive k per sweep point from `rel_error` (demand.timesteps = 0).
  bool auto_timesteps = false;
  double rel_error = 0.06;
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;
  std::vector<std::string> pricers{"oracle", "mcts", "flatrate"};
  int replications = 100;
  int flatrate_training = 100;
  std::optional<double> flatrate_rate;   ///< fixed rate; skips training
  MctsParams mcts;
  std::uint64_t vi_max_states = 20'000'000;
  std::string vi_policy_in;    ///< load instead of solving (single-point runs)
  std::string vi_policy_out;   ///< save the solved policy (single-point runs)
  std::uint64_t seed = 1;
  bool timing = true;
  bool keep_traces = false;

  void validate() const;
  /// Instance of one sweep point.
  InstanceConfig point_config(double value) const;
  /// Sweep values, or a single NaN placeholder when axis == none.
  std::vector<double> points() const;
};

struct ResultRow {
  SweepAxis axis = SweepAxis::none;
  double value = 0.0;
  std::string pricer;
  std::string status = "ok";
  Summary revenue;
  double utilization_mean = 0.0;
  double accepted_mean = 0.0;
  double requests_mean = 0.0;
  double runtime_mean = 0.0;
  /// Per-replication values, ordered by replication index.
  std::vector<double> revenues;
  std::vector<SimTrace> traces;   ///< filled when keep_traces
  /// Extra numbers about the cell: VI's exact expected value, the trained
  /// flatrate, the timestep count used.
  std::optional<double> vi_expected_value;
  std::optional<double> flatrate_rate;
  int timesteps = 0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
};

/// Spec from the flat config keys (`n`, `pricers`, `sweep.*`, `mcts.*`,
/// `flatrate.*`, `vi.*`, `timing`, `traces`, plus the instance keys).
ExperimentSpec experiment_spec(const KeyValueConfig& cfg);

/// Generation seed of replication i; shared by all pricers and sweep points.
std::uint64_t sequence_seed(std::uint64_t root, std::size_t replication);

/// Runs every (sweep point, pricer) cell on paired sequences. Replications
/// run as an OpenMP loop (or serially); aggregation is ordered by
/// replication index, so the numbers do not depend on the worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec, Execution exec = Execution::parallel);

/// CSV columns: sweep_axis, sweep_value, pricer, n, revenue_mean,
/// revenue_ci95, utilization_mean_h, accepted_mean, requests_mean,
/// runtime_mean_s, status. The runtime cell is empty when timing is off.
void write_results_csv(std::ostream& os, const ExperimentResult& result, bool timing);

/// One line per trace record: sweep_value pricer replication request
/// arrival_step first_slot length offered_rate accepted reward.
void write_traces(std::ostream& os, const ExperimentResult& result, const PriceGrid& grid);

struct GridCell {
  double exploration = 0.0;
  int max_depth = 0;
  int iterations = 0;
  Summary revenue;
  double runtime_mean = 0.0;
  std::vector<double> revenues;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

/// Full grid over (c, d, mu) with the spec's paired sequences; picks the
/// highest mean revenue, ties broken by lower mean runtime. Throws
/// ConfigError on an empty axis.
GridSearchResult grid_search(const ExperimentSpec& spec, const std::vector<double>& exploration,
                             const std::vector<int>& depth, const std::vector<int>& iterations,
                             Execution exec = Execution::parallel);

void write_grid_csv(std::ostream& os, const GridSearchResult& result, bool timing);

}  // namespace evprice
