#pragma once

// Test-side reference implementations. They deliberately avoid the library's
// transition code so that agreement means something.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "evprice/demand.hpp"
#include "evprice/market.hpp"
#include "evprice/pricing_mdp.hpp"

namespace evtest {

__extension__ typedef __int128 Wide;

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// CDF of Normal(mean, sd) conditioned on x > floor.
inline double trunc_normal_cdf(double x, double mean, double sd, double floor) {
  if (x <= floor) return 0.0;
  const double lo = std_normal_cdf((floor - mean) / sd);
  return (std_normal_cdf((x - mean) / sd) - lo) / (1.0 - lo);
}

struct SmallSpec {
  int n_slots = 2;
  int c0 = 1;
  int k = 6;
  double slot_hours = 12.0;
  std::vector<double> rates{0.5, 1.0, 1.5};
  std::vector<double> lambdas{0.9, 0.6, 1.5};   // contiguous products, by first slot then length
  double b_mean = 1.0, b_sd = 0.5, b_floor = 0.0;
};

struct SmallProduct {
  int first;
  int len;
};

inline std::vector<SmallProduct> small_products(int n) {
  std::vector<SmallProduct> out;
  for (int s = 0; s < n; ++s)
    for (int len = 1; s + len <= n; ++len) out.push_back({s, len});
  return out;
}

inline evprice::TransitionModel build_model(const SmallSpec& sp) {
  using namespace evprice;
  return TransitionModel(SlotGrid(sp.n_slots, sp.slot_hours),
                         CapacityVector::uniform(sp.n_slots, sp.c0),
                         DiscreteDemandProcess(IntensityVector(sp.lambdas),
                                               Discretization(sp.n_slots * sp.slot_hours, sp.k)),
                         BudgetModel{sp.b_mean, sp.b_sd, sp.b_floor}, PriceGrid(sp.rates));
}

/// Memoized expectimax over the full game tree of the small model, written
/// from the model definition only.
class Expectimax {
 public:
  explicit Expectimax(SmallSpec sp) : sp_(std::move(sp)), products_(small_products(sp_.n_slots)) {}

  double p_acc(double rate) const {
    return 1.0 - trunc_normal_cdf(rate, sp_.b_mean, sp_.b_sd, sp_.b_floor);
  }

  bool sellable(const std::vector<int>& cap, int t, int pend) const {
    if (pend < 0) return false;
    const auto& p = products_[static_cast<std::size_t>(pend)];
    if (t >= p.first * (sp_.k / sp_.n_slots)) return false;
    for (int j = p.first; j < p.first + p.len; ++j)
      if (cap[static_cast<std::size_t>(j)] < 1) return false;
    return true;
  }

  std::vector<int> after_sale(std::vector<int> cap, int pend) const {
    const auto& p = products_[static_cast<std::size_t>(pend)];
    for (int j = p.first; j < p.first + p.len; ++j) --cap[static_cast<std::size_t>(j)];
    return cap;
  }

  double price(int pend, int a) const {
    return sp_.rates[static_cast<std::size_t>(a)] * products_[static_cast<std::size_t>(pend)].len *
           sp_.slot_hours;
  }

  /// Value with the pending request of timestep t already revealed.
  double value(const std::vector<int>& cap, int t, int pend) {
    if (t >= sp_.k) return 0.0;
    const double keep = expected(cap, t + 1);
    double best = keep;
    if (sellable(cap, t, pend)) {
      const double sold = expected(after_sale(cap, pend), t + 1);
      for (int a = 0; a < static_cast<int>(sp_.rates.size()); ++a) {
        const double pa = p_acc(sp_.rates[static_cast<std::size_t>(a)]);
        best = std::max(best, pa * (price(pend, a) + sold) + (1.0 - pa) * keep);
      }
    }
    return best;
  }

  /// Expectation over the request revealed at timestep t.
  double expected(const std::vector<int>& cap, int t) {
    if (t >= sp_.k) return 0.0;
    const auto key = std::make_pair(cap, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double total = 0.0, none = 1.0;
    for (std::size_t i = 0; i < products_.size(); ++i) {
      const double pr = sp_.lambdas[i] / sp_.k;
      none -= pr;
      total += pr * value(cap, t, static_cast<int>(i));
    }
    total += none * value(cap, t, -1);
    memo_.emplace(key, total);
    return total;
  }

  double initial_value() {
    return expected(std::vector<int>(static_cast<std::size_t>(sp_.n_slots), sp_.c0), 0);
  }

  const SmallSpec& spec() const { return sp_; }
  const std::vector<SmallProduct>& products() const { return products_; }

 private:
  SmallSpec sp_;
  std::vector<SmallProduct> products_;
  std::map<std::pair<std::vector<int>, int>, double> memo_;
};

/// Fixed-point value of a price, 2^-64 units.
inline Wide to_wide(double v) { return static_cast<Wide>(std::ldexp(v, 64)); }

/// Best revenue over all 2^m accepted subsets, in 2^-64 fixed point.
inline Wide exhaustive_best(const evprice::RequestSequence& seq, int capacity,
                            const std::vector<double>& rates, double slot_hours, int k) {
  const int n = seq.n_slots;
  const std::size_t m = seq.requests.size();
  std::vector<Wide> value(m, 0);
  std::vector<bool> usable(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = seq.requests[i];
    const double hours = r.product.length() * slot_hours;
    std::optional<double> best;
    for (double rate : rates)
      if (rate * hours <= r.budget) best = rate * hours;
    usable[i] = best.has_value() && r.arrival_step < r.product.first_slot() * (k / n) &&
                capacity >= 1;
    if (usable[i]) value[i] = to_wide(*best);
  }
  Wide best = 0;
  std::vector<int> load(static_cast<std::size_t>(n));
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    std::fill(load.begin(), load.end(), 0);
    Wide sum = 0;
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      if (!((mask >> i) & 1)) continue;
      if (!usable[i]) { ok = false; break; }
      const auto& p = seq.requests[i].product;
      for (int j = p.first_slot(); j <= p.last_slot(); ++j)
        if (++load[static_cast<std::size_t>(j)] > capacity) ok = false;
      sum += value[i];
    }
    if (ok && sum > best) best = sum;
  }
  return best;
}

}  // namespace evtest
