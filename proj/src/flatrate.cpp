#include "evprice/flatrate.hpp"

#include "evprice/errors.hpp"
#include "evprice/exact_sum.hpp"

namespace evprice {

double flatrate_revenue(const RequestSequence& sequence, Action rate, const PriceGrid& grid,
                        const CapacityVector& capacity, const SlotGrid& slots, int timesteps) {
  CapacityVector cap = capacity;
  ExactSum revenue;
  for (const auto& r : sequence.requests) {
    if (!feasible(cap, r.product, r.arrival_step, slots, timesteps)) continue;
    const double price = grid.total_price(rate, r.product, slots);
    if (price <= r.budget) {
      revenue.add(price);
      cap.reserve(r.product);
    }
  }
  return revenue.value();
}

FlatrateTraining train_flatrate(std::span<const RequestSequence> training, const PriceGrid& grid,
                                const CapacityVector& capacity, const SlotGrid& slots,
                                int timesteps) {
  if (training.empty()) throw ContractViolation("flatrate training needs at least one sequence");
  FlatrateTraining out;
  out.mean_revenue.assign(grid.size(), 0.0);
  for (std::size_t a = 0; a < grid.size(); ++a) {
    double sum = 0.0;
    for (const auto& seq : training)
      sum += flatrate_revenue(seq, Action(static_cast<int>(a)), grid, capacity, slots, timesteps);
    out.mean_revenue[a] = sum / static_cast<double>(training.size());
  }
  std::size_t best = 0;
  for (std::size_t a = 1; a < grid.size(); ++a)
    if (out.mean_revenue[a] > out.mean_revenue[best]) best = a;
  out.rate = Action(static_cast<int>(best));
  return out;
}

}  // namespace evprice
