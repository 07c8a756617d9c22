#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "evprice/execution.hpp"
#include "evprice/pricer.hpp"
#include "evprice/pricing_mdp.hpp"

namespace evprice {

/// Tabular optimal policy and value function of a TransitionModel.
class ViPolicy {
 public:
  ViPolicy(StateIndexer indexer, std::vector<double> values, std::vector<std::int16_t> actions);

  const StateIndexer& indexer() const { return indexer_; }
  std::uint64_t size() const { return values_.size(); }

  /// V(s); 0 for terminal states.
  double value(const State& s) const;
  Action action(const State& s) const;

  /// E[V(c0, 0, p)] over the first request's law.
  double expected_initial_value(const TransitionModel& model) const;

  std::span<const double> values() const { return values_; }
  std::span<const std::int16_t> actions() const { return actions_; }

 private:
  StateIndexer indexer_;
  std::vector<double> values_;
  std::vector<std::int16_t> actions_;  // grid index, -1 = Reject
  int horizon_;
};

/// Exact backward induction over t = k-1 ... 0. Each layer is an OpenMP loop
/// over capacity vectors; Execution::serial runs the same loop on one
/// thread. Ties go to the lowest price (Reject last). Throws ResourceGuard
/// when the state count exceeds `max_states`.
ViPolicy value_iteration(const TransitionModel& model, std::uint64_t max_states,
                         Execution exec = Execution::parallel);

/// Text format: header line with sizes, then one "value action" per state
/// in StateIndexer order.
void save_policy(std::ostream& os, const ViPolicy& policy);
ViPolicy load_policy(std::istream& is, const TransitionModel& model);

class ViPricer final : public Pricer {
 public:
  explicit ViPricer(const ViPolicy& policy) : policy_(policy) {}
  std::string name() const override { return "vi"; }
  Action decide(const State& state, std::size_t) override { return policy_.action(state); }

 private:
  const ViPolicy& policy_;
};

}  // namespace evprice
