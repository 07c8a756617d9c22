#include "evprice/value_iteration.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "evprice/errors.hpp"
#include "evprice/market.hpp"

namespace evprice {

ViPolicy::ViPolicy(StateIndexer indexer, std::vector<double> values,
                   std::vector<std::int16_t> actions)
    : indexer_(std::move(indexer)),
      values_(std::move(values)),
      actions_(std::move(actions)),
      horizon_(static_cast<int>(indexer_.size() / (indexer_.capacity_count() * indexer_.pending_count()))) {
  if (values_.size() != indexer_.size() || actions_.size() != indexer_.size())
    throw ContractViolation("policy tables do not match the state space");
}

double ViPolicy::value(const State& s) const {
  if (s.t >= horizon_) return 0.0;
  return values_[indexer_.index(s)];
}

Action ViPolicy::action(const State& s) const {
  if (s.t >= horizon_) return Action::reject();
  const auto a = actions_[indexer_.index(s)];
  return a < 0 ? Action::reject() : Action(a);
}

double ViPolicy::expected_initial_value(const TransitionModel& model) const {
  double v = 0.0;
  for (const auto& [pending, pr] : model.pending_distribution(0))
    v += pr * value(State{model.initial_capacity(), 0, pending});
  return v;
}

ViPolicy value_iteration(const TransitionModel& model, std::uint64_t max_states, Execution exec) {
  const std::uint64_t count = state_count(model);
  if (count > max_states)
    throw ResourceGuard("value iteration needs " + std::to_string(count) +
                        " states, above the ceiling of " + std::to_string(max_states));
  if (model.prices().size() > 32767) throw ConfigError("price grid too large for the policy table");

  StateIndexer indexer(model);
  const int k = model.horizon();
  const std::uint64_t n_caps = indexer.capacity_count();
  const std::size_t n_pend = indexer.pending_count();
  const std::size_t n_products = model.products().size();
  const std::size_t n_prices = model.prices().size();
  const int n_slots = model.slots().n_slots();

  // capacity-index offset of every product: sum of the strides of its slots
  std::vector<std::uint64_t> stride(static_cast<std::size_t>(n_slots));
  {
    std::uint64_t s = 1;
    for (int j = 0; j < n_slots; ++j) {
      stride[static_cast<std::size_t>(j)] = s;
      s *= static_cast<std::uint64_t>(model.initial_capacity()[static_cast<std::size_t>(j)] + 1);
    }
  }
  std::vector<std::uint64_t> product_offset(n_products, 0);
  std::vector<int> deadline(n_products);
  for (std::size_t p = 0; p < n_products; ++p) {
    const auto& prod = model.products()[p];
    for (int j = prod.first_slot(); j <= prod.last_slot(); ++j)
      product_offset[p] += stride[static_cast<std::size_t>(j)];
    deadline[p] = model.slots().deadline_step(prod.first_slot(), k);
  }
  std::vector<double> price(n_products * n_prices), accept(n_products * n_prices);
  for (std::size_t p = 0; p < n_products; ++p)
    for (std::size_t a = 0; a < n_prices; ++a) {
      price[p * n_prices + a] = model.total_price(p, Action(static_cast<int>(a)));
      accept[p * n_prices + a] = model.acceptance_probability(p, Action(static_cast<int>(a)));
    }

  std::vector<double> values(count, 0.0);
  std::vector<std::int16_t> actions(count, -1);
  // continuation[c] = E_{p'}[V(c, t + 1, p')]; zero beyond the horizon
  std::vector<double> continuation(n_caps, 0.0);

  auto solve_capacity = [&](int t, std::uint64_t ci) {
    const CapacityVector cap = indexer.capacity_at(ci);
    const double keep = continuation[ci];
    const std::uint64_t base = (static_cast<std::uint64_t>(t) * n_caps + ci) * n_pend;
    for (std::size_t p = 0; p < n_products; ++p) {
      double best = keep;
      std::int16_t best_action = -1;
      if (t < deadline[p] && cap.fits(model.products()[p])) {
        const double sold = continuation[ci - product_offset[p]];
        // ascending scan with strict improvement keeps the lowest price on ties;
        // Reject is compared last
        double best_priced = -1.0;
        std::int16_t best_priced_action = -1;
        for (std::size_t a = 0; a < n_prices; ++a) {
          const double pa = accept[p * n_prices + a];
          const double q = pa * (price[p * n_prices + a] + sold) + (1.0 - pa) * keep;
          if (best_priced_action < 0 || q > best_priced) {
            best_priced = q;
            best_priced_action = static_cast<std::int16_t>(a);
          }
        }
        if (best_priced >= keep) {
          best = best_priced;
          best_action = best_priced_action;
        }
      }
      values[base + p] = best;
      actions[base + p] = best_action;
    }
    values[base + n_products] = keep;  // empty request: only Reject
    actions[base + n_products] = -1;
  };

  auto refresh_continuation = [&](int t, std::uint64_t ci) {
    // law of the request pending at timestep t (die roll t + 1)
    double w = 0.0;
    const std::uint64_t base = (static_cast<std::uint64_t>(t) * n_caps + ci) * n_pend;
    for (std::size_t p = 0; p < n_products; ++p)
      w += model.demand().request_probability(p, t + 1) * values[base + p];
    w += model.demand().request_probability(std::nullopt, t + 1) * values[base + n_products];
    continuation[ci] = w;
  };

  const auto n_caps_signed = static_cast<long long>(n_caps);
  for (int t = k - 1; t >= 0; --t) {
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
      for (long long ci = 0; ci < n_caps_signed; ++ci) solve_capacity(t, static_cast<std::uint64_t>(ci));
#pragma omp parallel for schedule(static)
      for (long long ci = 0; ci < n_caps_signed; ++ci) refresh_continuation(t, static_cast<std::uint64_t>(ci));
    } else {
      for (long long ci = 0; ci < n_caps_signed; ++ci) solve_capacity(t, static_cast<std::uint64_t>(ci));
      for (long long ci = 0; ci < n_caps_signed; ++ci) refresh_continuation(t, static_cast<std::uint64_t>(ci));
    }
  }
  return ViPolicy(std::move(indexer), std::move(values), std::move(actions));
}

void save_policy(std::ostream& os, const ViPolicy& policy) {
  os << "# evprice-vi-policy v1\n";
  os << "states " << policy.size() << "\n";
  const auto values = policy.values();
  const auto actions = policy.actions();
  for (std::size_t i = 0; i < values.size(); ++i)
    os << format_double(values[i]) << ' ' << actions[i] << '\n';
}

ViPolicy load_policy(std::istream& is, const TransitionModel& model) {
  StateIndexer indexer(model);
  std::string line;
  std::getline(is, line);
  if (line != "# evprice-vi-policy v1") throw ConfigError("not a VI policy file");
  std::string tag;
  std::uint64_t n = 0;
  if (!(is >> tag >> n) || tag != "states") throw ConfigError("VI policy file lacks a state count");
  if (n != indexer.size()) throw ConfigError("VI policy was solved for a different model");
  std::vector<double> values(n);
  std::vector<std::int16_t> actions(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string v;
    int a = 0;
    if (!(is >> v >> a)) throw ConfigError("truncated VI policy file");
    values[i] = std::stod(v);
    if (a < -1 || a >= static_cast<int>(model.prices().size()))
      throw ConfigError("VI policy action outside the price grid");
    actions[i] = static_cast<std::int16_t>(a);
  }
  return ViPolicy(std::move(indexer), std::move(values), std::move(actions));
}

}  // namespace evprice
