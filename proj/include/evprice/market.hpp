#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evprice/demand.hpp"
#include "evprice/rng.hpp"

namespace evprice {

/// The charging resources: n equal timeslots covering the selling horizon.
/// Slot j's selling deadline is its start time.
class SlotGrid {
 public:
  SlotGrid(int n_slots, double slot_length_hours);

  int n_slots() const { return n_slots_; }
  double slot_length_hours() const { return slot_length_hours_; }
  double horizon_hours() const { return n_slots_ * slot_length_hours_; }

  /// Timesteps per slot; throws ConfigError unless n_slots divides timesteps.
  int steps_per_slot(int timesteps) const;

  /// Selling deadline of `slot` in timesteps (start of the slot).
  int deadline_step(int slot, int timesteps) const {
    return slot * steps_per_slot(timesteps);
  }

  bool operator==(const SlotGrid&) const = default;

 private:
  int n_slots_;
  double slot_length_hours_;
};

/// A reservation bundle: one contiguous run of timeslots.
class Product {
 public:
  Product(int first_slot, int length, int n_slots);

  /// Validates a 0/1 incidence vector (one contiguous run of ones).
  static Product from_incidence(std::span<const int> incidence);

  int first_slot() const { return first_slot_; }
  int last_slot() const { return first_slot_ + length_ - 1; }
  int length() const { return length_; }
  int n_slots() const { return n_slots_; }
  bool uses(int slot) const { return slot >= first_slot_ && slot <= last_slot(); }
  std::vector<int> incidence() const;
  double duration_hours(const SlotGrid& grid) const {
    return length_ * grid.slot_length_hours();
  }

  auto operator<=>(const Product&) const = default;

 private:
  int first_slot_;
  int length_;
  int n_slots_;
};

/// All n(n+1)/2 contiguous products over n slots, ordered by first slot and
/// then by length.
class ProductCatalog {
 public:
  explicit ProductCatalog(int n_slots);

  std::size_t size() const { return products_.size(); }
  const Product& operator[](std::size_t i) const { return products_[i]; }
  std::size_t index_of(const Product& p) const;
  auto begin() const { return products_.begin(); }
  auto end() const { return products_.end(); }

 private:
  int n_slots_;
  std::vector<Product> products_;
};

/// Remaining charger capacity per timeslot.
class CapacityVector {
 public:
  CapacityVector() = default;
  explicit CapacityVector(std::vector<int> remaining);
  static CapacityVector uniform(int n_slots, int capacity) {
    return CapacityVector(std::vector<int>(static_cast<std::size_t>(n_slots), capacity));
  }

  std::span<const int> remaining() const { return remaining_; }
  int operator[](std::size_t slot) const { return remaining_[slot]; }
  std::size_t size() const { return remaining_.size(); }

  bool fits(const Product& p) const;
  /// Subtracts the product's incidence; throws ContractViolation if it does not fit.
  void reserve(const Product& p);

  bool operator==(const CapacityVector&) const = default;

 private:
  std::vector<int> remaining_;
};

/// An offered price: an index into the price grid or the infinite
/// (reject) price.
class Action {
 public:
  static constexpr int kReject = -1;

  constexpr Action() = default;
  constexpr explicit Action(int grid_index) : index_(grid_index) {}
  static constexpr Action reject() { return Action{}; }

  constexpr bool is_reject() const { return index_ == kReject; }
  constexpr int index() const { return index_; }

  constexpr bool operator==(const Action&) const = default;

 private:
  int index_ = kReject;
};

/// Per-hour unit rates; the total price of an action for a product is
/// rate * duration.
class PriceGrid {
 public:
  explicit PriceGrid(std::vector<double> unit_rates);
  /// min, min + step, ... up to max inclusive (within rounding).
  static PriceGrid linspace(double min_rate, double max_rate, double step);

  std::size_t size() const { return rates_.size(); }
  double rate(Action a) const;
  std::span<const double> rates() const { return rates_; }
  double total_price(Action a, const Product& p, const SlotGrid& grid) const;

 private:
  std::vector<double> rates_;
};

struct Request {
  Product product;
  int arrival_step = 0;         ///< 0-based MDP timestep of the arrival
  double arrival_hours = 0.0;   ///< continuous timestamp
  double budget = 0.0;          ///< hidden total willingness to pay
};

struct RequestSequence {
  std::vector<Request> requests;
  std::uint64_t seed = 0;
  int n_slots = 0;
};

/// Per-hour budget rate ~ Normal(mean, sd) truncated below at `floor`
/// (by resampling). A customer's total budget is rate * reserved hours.
struct BudgetModel {
  double mean = 1.0;
  double sd = 0.5;
  double floor = 0.0;

  double cdf(double rate) const;
  double sample(Rng& rng) const;
};

enum class ArrivalMode { discrete, continuous };

/// Synthetic instance parameters; defaults follow the paper's instance table.
struct InstanceConfig {
  SlotGrid slots{8, 3.0};
  int capacity = 3;
  double lambda = 24.0;
  int timesteps = 192;
  double duration_mean_hours = 3.0;
  double start_mean_hours = 12.0;
  double start_sd_hours = 3.0;
  BudgetModel budget;
  PriceGrid prices = PriceGrid::linspace(0.1, 3.0, 0.1);
  ArrivalMode mode = ArrivalMode::discrete;
  std::uint64_t seed = 1;

  /// Throws ConfigError on inconsistent parameters.
  void validate() const;
  Discretization discretization() const { return {slots.horizon_hours(), timesteps}; }
  CapacityVector initial_capacity() const {
    return CapacityVector::uniform(slots.n_slots(), capacity);
  }
};

/// Probability that a request's start snaps to each slot.
std::vector<double> start_slot_distribution(const InstanceConfig& cfg);

/// P(length = j + 1 slots | start slot), clipped at the end of the horizon.
std::vector<double> length_distribution(const InstanceConfig& cfg, int start_slot);

/// Per-product arrival intensities implied by the start/duration
/// distributions, indexed like ProductCatalog(n_slots).
IntensityVector product_intensities(const InstanceConfig& cfg);

RequestSequence generate_sequence(const InstanceConfig& cfg, std::uint64_t seed);

/// Protocol step 2: before the product's selling deadline and capacity
/// covers the incidence vector.
bool feasible(const CapacityVector& capacity, const Product& product, int t,
              const SlotGrid& slots, int timesteps);

/// Largest grid action whose total price does not exceed the budget.
std::optional<Action> floor_to_grid(double budget, const PriceGrid& grid,
                                    double duration_hours);

/// Line-oriented sequence records:
///   arrival_timestep continuous_time_hours first_slot n_slots_requested budget
/// preceded by `#` header lines carrying the seed and slot count.
void write_sequence(std::ostream& os, const RequestSequence& seq);
RequestSequence read_sequence(std::istream& is);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace evprice
