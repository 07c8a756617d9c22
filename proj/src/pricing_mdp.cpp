#include "evprice/pricing_mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "evprice/errors.hpp"

namespace evprice {

std::size_t StateHash::operator()(const State& s) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (int c : s.capacity.remaining()) mix(static_cast<std::uint64_t>(c));
  mix(static_cast<std::uint64_t>(s.t));
  mix(s.pending ? *s.pending + 1 : 0);
  return static_cast<std::size_t>(mix64(h));
}

TransitionModel::TransitionModel(SlotGrid slots, CapacityVector initial_capacity,
                                 DiscreteDemandProcess demand, BudgetModel budget,
                                 PriceGrid prices)
    : slots_(slots),
      initial_capacity_(std::move(initial_capacity)),
      demand_(std::move(demand)),
      budget_(budget),
      prices_(std::move(prices)),
      catalog_(slots.n_slots()) {
  if (initial_capacity_.size() != static_cast<std::size_t>(slots_.n_slots()))
    throw ConfigError("initial capacity must have one entry per slot");
  if (demand_.product_count() != catalog_.size())
    throw ConfigError("demand intensities must cover every contiguous product");
  if (!(demand_.discretization().horizon_hours() > 0.0) ||
      std::abs(demand_.discretization().horizon_hours() - slots_.horizon_hours()) > 1e-9)
    throw ConfigError("demand horizon must match the slot grid");
  const int k = demand_.timesteps();
  for (const auto& p : catalog_) deadlines_.push_back(slots_.deadline_step(p.first_slot(), k));

  accept_table_.resize(catalog_.size() * prices_.size());
  for (std::size_t p = 0; p < catalog_.size(); ++p)
    for (std::size_t a = 0; a < prices_.size(); ++a)
      accept_table_[p * prices_.size() + a] =
          1.0 - budget_.cdf(prices_.rate(Action(static_cast<int>(a))));
}

TransitionModel TransitionModel::from_instance(const InstanceConfig& cfg) {
  cfg.validate();
  return TransitionModel(cfg.slots, cfg.initial_capacity(),
                         DiscreteDemandProcess(product_intensities(cfg), cfg.discretization()),
                         cfg.budget, cfg.prices);
}

bool TransitionModel::pending_feasible(const State& s) const {
  if (!s.pending || terminal(s)) return false;
  return s.t < deadlines_[*s.pending] && s.capacity.fits(catalog_[*s.pending]);
}

std::vector<Action> TransitionModel::legal_actions(const State& s) const {
  std::vector<Action> actions;
  if (pending_feasible(s)) {
    actions.reserve(prices_.size() + 1);
    for (std::size_t a = 0; a < prices_.size(); ++a) actions.emplace_back(static_cast<int>(a));
  }
  actions.push_back(Action::reject());
  return actions;
}

double TransitionModel::total_price(std::size_t product, Action a) const {
  return prices_.total_price(a, catalog_[product], slots_);
}

double TransitionModel::acceptance_probability(std::size_t product, Action a) const {
  if (a.is_reject()) return 0.0;
  return accept_table_.at(product * prices_.size() + static_cast<std::size_t>(a.index()));
}

double TransitionModel::acceptance_probability_at(std::size_t product, double price) const {
  const double hours = catalog_[product].duration_hours(slots_);
  return 1.0 - budget_.cdf(price / hours);
}

std::vector<std::pair<ProductDraw, double>> TransitionModel::pending_distribution(int t) const {
  std::vector<std::pair<ProductDraw, double>> law;
  if (t >= horizon()) {
    law.emplace_back(std::nullopt, 1.0);
    return law;
  }
  for (std::size_t p = 0; p < catalog_.size(); ++p) {
    const double pr = demand_.request_probability(p, t + 1);
    if (pr > 0.0) law.emplace_back(p, pr);
  }
  const double empty = demand_.request_probability(std::nullopt, t + 1);
  if (empty > 0.0) law.emplace_back(std::nullopt, empty);
  return law;
}

ProductDraw TransitionModel::sample_pending(int t, Rng& rng) const {
  if (t >= horizon()) return std::nullopt;
  return demand_.sample_step(t + 1, rng);
}

State TransitionModel::initial_state(Rng& rng) const {
  return State{initial_capacity_, 0, sample_pending(0, rng)};
}

double reward(const TransitionModel& model, const State& state, Action action, bool accepted) {
  if (!accepted || action.is_reject() || !state.pending) return 0.0;
  return model.total_price(*state.pending, action);
}

namespace {

void check_action(const TransitionModel& model, const State& state, Action action) {
  if (model.terminal(state)) throw ContractViolation("transition from a terminal state");
  if (!action.is_reject()) {
    if (!model.pending_feasible(state))
      throw ContractViolation("priced action on an empty or infeasible request");
    if (static_cast<std::size_t>(action.index()) >= model.prices().size())
      throw ContractViolation("action outside the price grid");
  }
}

}  // namespace

Transition sample_transition(const TransitionModel& model, const State& state, Action action,
                             Rng& rng) {
  check_action(model, state, action);
  Transition tr{state, 0.0, false};
  if (!action.is_reject()) {
    const double p_acc = model.acceptance_probability(*state.pending, action);
    if (uniform01(rng) < p_acc) {
      tr.accepted = true;
      tr.reward = model.total_price(*state.pending, action);
      tr.next.capacity.reserve(model.products()[*state.pending]);
    }
  }
  tr.next.t = state.t + 1;
  tr.next.pending = model.sample_pending(tr.next.t, rng);
  return tr;
}

std::vector<Outcome> transition_distribution(const TransitionModel& model, const State& state,
                                             Action action) {
  check_action(model, state, action);
  const auto pending_law = model.pending_distribution(state.t + 1);
  std::vector<Outcome> out;
  out.reserve(2 * pending_law.size());

  double p_acc = 0.0;
  CapacityVector after = state.capacity;
  double price = 0.0;
  if (!action.is_reject()) {
    p_acc = model.acceptance_probability(*state.pending, action);
    price = model.total_price(*state.pending, action);
    after.reserve(model.products()[*state.pending]);
  }
  for (const auto& [next_pending, pr] : pending_law) {
    if (p_acc > 0.0)
      out.push_back({State{after, state.t + 1, next_pending}, p_acc * pr, price});
    if (p_acc < 1.0)
      out.push_back({State{state.capacity, state.t + 1, next_pending}, (1.0 - p_acc) * pr, 0.0});
  }
  return out;
}

StateIndexer::StateIndexer(const TransitionModel& model)
    : pending_count_(model.products().size() + 1), horizon_(model.horizon()) {
  for (int c : model.initial_capacity().remaining()) {
    radix_.push_back(c + 1);
    if (capacity_count_ > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(c + 1))
      throw ResourceGuard("state space too large to index");
    capacity_count_ *= static_cast<std::uint64_t>(c + 1);
  }
  per_step_ = capacity_count_ * pending_count_;
}

std::uint64_t StateIndexer::capacity_index(const CapacityVector& c) const {
  std::uint64_t idx = 0;
  for (std::size_t j = c.size(); j-- > 0;) idx = idx * static_cast<std::uint64_t>(radix_[j]) + static_cast<std::uint64_t>(c[j]);
  return idx;
}

CapacityVector StateIndexer::capacity_at(std::uint64_t index) const {
  std::vector<int> rem(radix_.size());
  for (std::size_t j = 0; j < radix_.size(); ++j) {
    rem[j] = static_cast<int>(index % static_cast<std::uint64_t>(radix_[j]));
    index /= static_cast<std::uint64_t>(radix_[j]);
  }
  return CapacityVector(std::move(rem));
}

std::uint64_t StateIndexer::index(const State& s) const {
  const std::uint64_t pend = s.pending ? *s.pending : pending_count_ - 1;
  return (static_cast<std::uint64_t>(s.t) * capacity_count_ + capacity_index(s.capacity)) *
             pending_count_ + pend;
}

State StateIndexer::state_at(std::uint64_t index) const {
  State s;
  const std::uint64_t pend = index % pending_count_;
  index /= pending_count_;
  s.capacity = capacity_at(index % capacity_count_);
  s.t = static_cast<int>(index / capacity_count_);
  if (pend + 1 < pending_count_) s.pending = static_cast<std::size_t>(pend);
  return s;
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

}  // namespace

std::uint64_t state_count(const TransitionModel& model) {
  std::uint64_t n = static_cast<std::uint64_t>(model.horizon());
  for (int c : model.initial_capacity().remaining()) n = sat_mul(n, static_cast<std::uint64_t>(c + 1));
  return sat_mul(n, model.products().size() + 1);
}

std::uint64_t state_count_formula(long long k, int c0, int n_slots) {
  std::uint64_t n = static_cast<std::uint64_t>(k);
  for (int j = 0; j < n_slots; ++j) n = sat_mul(n, static_cast<std::uint64_t>(c0 + 1));
  const auto products = static_cast<std::uint64_t>(n_slots) * static_cast<std::uint64_t>(n_slots + 1) / 2;
  return sat_mul(n, products + 1);
}

double state_count_paper(long long k, int c0, int n_slots) {
  return static_cast<double>(k) * std::pow(static_cast<double>(c0), n_slots) * n_slots *
         (n_slots + 1) / 2.0;
}

std::vector<State> enumerate_states(const TransitionModel& model, std::uint64_t max_states) {
  const std::uint64_t count = state_count(model);
  if (count > max_states)
    throw ResourceGuard("state space has " + std::to_string(count) +
                        " states, above the ceiling of " + std::to_string(max_states));
  const StateIndexer indexer(model);
  std::vector<State> states;
  states.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) states.push_back(indexer.state_at(i));
  return states;
}

}  // namespace evprice
