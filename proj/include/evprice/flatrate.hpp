#pragma once

#include <span>
#include <vector>

#include "evprice/market.hpp"
#include "evprice/pricer.hpp"

namespace evprice {

/// Revenue of offering one constant rate to every feasible request in
/// arrival order (first requested, first reserved).
double flatrate_revenue(const RequestSequence& sequence, Action rate, const PriceGrid& grid,
                        const CapacityVector& capacity, const SlotGrid& slots, int timesteps);

struct FlatrateTraining {
  Action rate;                        ///< revenue-maximizing grid rate
  std::vector<double> mean_revenue;   ///< per grid rate, over the training set
};

/// Evaluates every grid rate over the training sequences; ties go to the
/// lower rate. Throws ContractViolation on an empty training set.
FlatrateTraining train_flatrate(std::span<const RequestSequence> training, const PriceGrid& grid,
                                const CapacityVector& capacity, const SlotGrid& slots,
                                int timesteps);

class FlatratePricer final : public Pricer {
 public:
  explicit FlatratePricer(Action rate) : rate_(rate) {}
  std::string name() const override { return "flatrate"; }
  Action decide(const State&, std::size_t) override { return rate_; }
  Action rate() const { return rate_; }

 private:
  Action rate_;
};

}  // namespace evprice
