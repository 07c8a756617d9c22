#pragma once

#include <optional>
#include <vector>

#include "evprice/market.hpp"
#include "evprice/pricer.hpp"

namespace evprice {

struct OracleResult {
  double revenue = 0.0;
  std::vector<bool> accepted;                 ///< per request, sequence order
  std::vector<std::optional<Action>> floored; ///< budget floored to the grid
  std::size_t nodes = 0;                      ///< branch-and-bound nodes visited
};

/// Clairvoyant upper bound: chooses the request subset maximizing the sum of
/// floored budgets subject to per-slot capacity, by depth-first
/// branch-and-bound with a fractional (aggregated-capacity) relaxation bound.
/// Requests with no affordable grid price, or that arrive after their
/// product's selling deadline, are fixed to 0. Revenue is an ExactSum.
OracleResult oracle(const RequestSequence& sequence, const CapacityVector& capacity,
                    const PriceGrid& grid, const SlotGrid& slots, int timesteps);

/// Replays an oracle solution: offers each chosen request its floored price
/// and rejects the rest.
class OraclePricer final : public Pricer {
 public:
  OraclePricer(const CapacityVector& capacity, const PriceGrid& grid, const SlotGrid& slots,
               int timesteps)
      : capacity_(capacity), grid_(grid), slots_(slots), timesteps_(timesteps) {}

  std::string name() const override { return "oracle"; }
  void begin_sequence(const RequestSequence& sequence, std::uint64_t seed) override;
  Action decide(const State& state, std::size_t request_index) override;
  const OracleResult& solution() const { return solution_; }

 private:
  CapacityVector capacity_;
  PriceGrid grid_;
  SlotGrid slots_;
  int timesteps_;
  OracleResult solution_;
};

}  // namespace evprice
