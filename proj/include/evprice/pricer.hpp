#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "evprice/market.hpp"
#include "evprice/pricing_mdp.hpp"

namespace evprice {

/// Common interface of every pricing policy driven by the harness.
class Pricer {
 public:
  virtual ~Pricer() = default;

  virtual std::string name() const = 0;

  /// Called once before a sequence is replayed. `seed` feeds the pricer's
  /// own decision stream; clairvoyant pricers may inspect the sequence.
  virtual void begin_sequence(const RequestSequence& /*sequence*/, std::uint64_t /*seed*/) {}

  /// Price the pending request of `state`. Only called for feasible requests.
  virtual Action decide(const State& state, std::size_t request_index) = 0;
};

}  // namespace evprice
