#include "evprice/oracle.hpp"

#include "evprice/exact_sum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace evprice {

namespace {

// Exact objective: floored prices repeat a lot, so ties must not depend on
// summation order.
using Fixed = ExactSum::Fixed;
Fixed to_fixed(double v) { return ExactSum::to_fixed(v); }
double from_fixed(Fixed v) { return ExactSum::to_double(v); }

struct Item {
  std::size_t request;
  Fixed value;
  int first;
  int last;
  int length;
};

class BranchAndBound {
 public:
  BranchAndBound(std::vector<Item> items, std::vector<int> capacity)
      : items_(std::move(items)), cap_(std::move(capacity)), take_(items_.size(), false) {}

  void solve() { dfs(0, 0); }
  Fixed best() const { return best_; }
  const std::vector<bool>& best_set() const { return best_take_; }
  std::size_t nodes() const { return nodes_; }

 private:
  bool fits(const Item& it) const {
    for (int j = it.first; j <= it.last; ++j)
      if (cap_[static_cast<std::size_t>(j)] < 1) return false;
    return true;
  }

  // Fractional knapsack over the aggregated capacity of the slots still
  // usable by some remaining item; valid because capacity only shrinks.
  Fixed bound(std::size_t from, Fixed value) {
    used_.assign(cap_.size(), 0);
    for (std::size_t i = from; i < items_.size(); ++i)
      if (fits(items_[i]))
        for (int j = items_[i].first; j <= items_[i].last; ++j) used_[static_cast<std::size_t>(j)] = 1;
    long long room = 0;
    for (std::size_t j = 0; j < cap_.size(); ++j)
      if (used_[j]) room += cap_[j];
    Fixed b = value;
    for (std::size_t i = from; i < items_.size() && room > 0; ++i) {
      const Item& it = items_[i];
      if (!fits(it)) continue;
      if (it.length <= room) {
        b += it.value;
        room -= it.length;
      } else {
        b += (it.value * room + it.length - 1) / it.length;  // ceiling
        room = 0;
      }
    }
    return b;
  }

  void dfs(std::size_t i, Fixed value) {
    ++nodes_;
    if (value > best_ || best_take_.empty()) {
      best_ = value;
      best_take_ = take_;
    }
    if (i == items_.size()) return;
    if (bound(i, value) <= best_) return;
    const Item& it = items_[i];
    if (fits(it)) {
      for (int j = it.first; j <= it.last; ++j) --cap_[static_cast<std::size_t>(j)];
      take_[i] = true;
      dfs(i + 1, value + it.value);
      take_[i] = false;
      for (int j = it.first; j <= it.last; ++j) ++cap_[static_cast<std::size_t>(j)];
    }
    dfs(i + 1, value);
  }

  std::vector<Item> items_;
  std::vector<int> cap_;
  std::vector<bool> take_;
  std::vector<bool> best_take_;
  std::vector<char> used_;
  Fixed best_ = 0;
  std::size_t nodes_ = 0;
};

}  // namespace

OracleResult oracle(const RequestSequence& sequence, const CapacityVector& capacity,
                    const PriceGrid& grid, const SlotGrid& slots, int timesteps) {
  OracleResult out;
  const std::size_t n = sequence.requests.size();
  out.accepted.assign(n, false);
  out.floored.resize(n);

  std::vector<Item> items;
  for (std::size_t i = 0; i < n; ++i) {
    const Request& r = sequence.requests[i];
    const double hours = r.product.duration_hours(slots);
    out.floored[i] = floor_to_grid(r.budget, grid, hours);
    if (!out.floored[i]) continue;
    if (r.arrival_step >= slots.deadline_step(r.product.first_slot(), timesteps)) continue;
    if (!capacity.fits(r.product)) continue;
    items.push_back(Item{i, to_fixed(grid.total_price(*out.floored[i], r.product, slots)),
                         r.product.first_slot(), r.product.last_slot(), r.product.length()});
  }
  // value density order (cross-multiplied to stay exact), then sequence order
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.value * b.length > b.value * a.length;
  });

  std::vector<int> cap(capacity.remaining().begin(), capacity.remaining().end());
  BranchAndBound bb(items, std::move(cap));
  bb.solve();
  out.nodes = bb.nodes();

  const auto& take = bb.best_set();
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!take.empty() && take[i]) out.accepted[items[i].request] = true;
  out.revenue = from_fixed(bb.best());
  return out;
}

void OraclePricer::begin_sequence(const RequestSequence& sequence, std::uint64_t) {
  solution_ = oracle(sequence, capacity_, grid_, slots_, timesteps_);
}

Action OraclePricer::decide(const State&, std::size_t request_index) {
  if (request_index < solution_.accepted.size() && solution_.accepted[request_index])
    return *solution_.floored[request_index];
  return Action::reject();
}

}  // namespace evprice
