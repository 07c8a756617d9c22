#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "evprice/demand.hpp"
#include "evprice/market.hpp"
#include "evprice/rng.hpp"

namespace evprice {

/// MDP state (c, t, p). `t` is the 0-based timestep in [0, k]; the pending
/// request of state t is the die roll of timestep t + 1. States with t == k
/// are terminal and never carry a request.
struct State {
  CapacityVector capacity;
  int t = 0;
  std::optional<std::size_t> pending;  ///< index into the model's ProductCatalog

  bool operator==(const State&) const = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

/// The finite-horizon pricing MDP: demand process, budget model, slot grid
/// and price grid. Immutable after construction.
class TransitionModel {
 public:
  TransitionModel(SlotGrid slots, CapacityVector initial_capacity,
                  DiscreteDemandProcess demand, BudgetModel budget, PriceGrid prices);

  static TransitionModel from_instance(const InstanceConfig& cfg);

  const SlotGrid& slots() const { return slots_; }
  const ProductCatalog& products() const { return catalog_; }
  const DiscreteDemandProcess& demand() const { return demand_; }
  const BudgetModel& budget() const { return budget_; }
  const PriceGrid& prices() const { return prices_; }
  const CapacityVector& initial_capacity() const { return initial_capacity_; }
  int horizon() const { return demand_.timesteps(); }

  bool terminal(const State& s) const { return s.t >= horizon(); }
  bool pending_feasible(const State& s) const;

  /// Priced actions in ascending price order (only if the pending request is
  /// feasible), then Reject.
  std::vector<Action> legal_actions(const State& s) const;
  std::size_t legal_action_count(const State& s) const {
    return pending_feasible(s) ? prices_.size() + 1 : 1;
  }

  double total_price(std::size_t product, Action a) const;
  double acceptance_probability(std::size_t product, Action a) const;
  /// 1 - F(total_price) for the product's total-budget distribution.
  double acceptance_probability_at(std::size_t product, double total_price) const;

  /// Law of the pending request at timestep t (0-based), i.e. D(t + 1).
  std::vector<std::pair<ProductDraw, double>> pending_distribution(int t) const;
  ProductDraw sample_pending(int t, Rng& rng) const;

  /// c0 at t = 0 with the first request drawn from D(1).
  State initial_state(Rng& rng) const;

 private:
  SlotGrid slots_;
  CapacityVector initial_capacity_;
  DiscreteDemandProcess demand_;
  BudgetModel budget_;
  PriceGrid prices_;
  ProductCatalog catalog_;
  std::vector<int> deadlines_;          // per product, in timesteps
  std::vector<double> accept_table_;    // [product * |A| + action]
};

/// Total price if the customer accepted, else 0.
double reward(const TransitionModel& model, const State& state, Action action, bool accepted);

struct Transition {
  State next;
  double reward = 0.0;
  bool accepted = false;
};

/// Samples the two independent chance nodes: acceptance of the offer and the
/// next pending request. Throws ContractViolation for a priced action on an
/// empty or infeasible request, or for a terminal state.
Transition sample_transition(const TransitionModel& model, const State& state, Action action,
                             Rng& rng);

struct Outcome {
  State next;
  double probability = 0.0;
  double reward = 0.0;
};

/// Exact support of sample_transition (zero-probability branches dropped).
std::vector<Outcome> transition_distribution(const TransitionModel& model, const State& state,
                                             Action action);

/// Mixed-radix numbering of all non-terminal states
/// (capacity in 0..c0 per slot, t in [0, k), pending in products + empty).
class StateIndexer {
 public:
  explicit StateIndexer(const TransitionModel& model);

  std::uint64_t size() const { return per_step_ * static_cast<std::uint64_t>(horizon_); }
  std::uint64_t capacity_count() const { return capacity_count_; }
  std::size_t pending_count() const { return pending_count_; }

  std::uint64_t capacity_index(const CapacityVector& c) const;
  CapacityVector capacity_at(std::uint64_t index) const;
  std::uint64_t index(const State& s) const;
  State state_at(std::uint64_t index) const;

 private:
  std::vector<int> radix_;
  std::uint64_t capacity_count_ = 1;
  std::size_t pending_count_ = 0;
  std::uint64_t per_step_ = 0;
  int horizon_ = 0;
};

/// k * prod_j (c0_j + 1) * (n(n+1)/2 + 1), saturating at UINT64_MAX.
std::uint64_t state_count(const TransitionModel& model);

/// Closed form for uniform capacity: k (c0 + 1)^n (n(n+1)/2 + 1).
std::uint64_t state_count_formula(long long k, int c0, int n_slots);

/// The coarser count k c0^n n(n+1)/2 quoted alongside the exact one.
double state_count_paper(long long k, int c0, int n_slots);

/// All non-terminal states in index order. Throws ResourceGuard naming the
/// count if it exceeds `max_states`.
std::vector<State> enumerate_states(const TransitionModel& model, std::uint64_t max_states);

}  // namespace evprice
