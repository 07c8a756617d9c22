#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evprice/execution.hpp"
#include "evprice/rng.hpp"

namespace evprice {

/// Per-product Poisson intensities, in expected requests per selling period.
class IntensityVector {
 public:
  IntensityVector() = default;
  explicit IntensityVector(std::vector<double> rates);

  std::span<const double> rates() const { return rates_; }
  double rate(std::size_t product) const { return rates_.at(product); }
  double total() const { return total_; }
  std::size_t size() const { return rates_.size(); }

 private:
  std::vector<double> rates_;
  double total_ = 0.0;
};

/// The k-timestep grid laid over the selling period.
class Discretization {
 public:
  Discretization(double horizon_hours, int timesteps);

  double horizon_hours() const { return horizon_hours_; }
  int timesteps() const { return timesteps_; }
  double step_length_hours() const { return horizon_hours_ / timesteps_; }

 private:
  double horizon_hours_;
  int timesteps_;
};

/// Product index drawn in one timestep, or std::nullopt for "no request".
using ProductDraw = std::optional<std::size_t>;

/// Multi-class Bernoulli approximation of the compound Poisson arrival
/// process: in timestep t (1-based, t in [1, k]) product i arrives with
/// probability lambda_i * m(t) / k and nothing arrives otherwise. m(t) is an
/// optional per-timestep multiplier table; without one the process is
/// homogeneous (m = 1).
class DiscreteDemandProcess {
 public:
  DiscreteDemandProcess(IntensityVector intensity, Discretization grid,
                        std::vector<double> step_multipliers = {});

  const IntensityVector& intensity() const { return intensity_; }
  const Discretization& discretization() const { return grid_; }
  int timesteps() const { return grid_.timesteps(); }
  std::size_t product_count() const { return intensity_.size(); }
  bool homogeneous() const { return multipliers_.empty(); }

  /// p_req(product, t); `product == nullopt` asks for the empty outcome.
  /// Throws std::domain_error on a bad index or t outside [1, k].
  double request_probability(ProductDraw product, int t) const;

  /// Probability that any request arrives in timestep t.
  double arrival_probability(int t) const;

  /// One die roll for timestep t.
  ProductDraw sample_step(int t, Rng& rng) const;

  /// Product of a request known to have arrived (the mix is time-invariant).
  std::size_t sample_product(Rng& rng) const;

  /// Number of timesteps from t (in [0, k]) to the next arrival, so the next
  /// request lands in timestep t + delta. Returns nullopt when no request
  /// arrives in (t, k], which is always the case for zero intensity.
  std::optional<int> sample_interarrival(int t, Rng& rng) const;

 private:
  double multiplier(int t) const;

  IntensityVector intensity_;
  Discretization grid_;
  std::vector<double> multipliers_;
  std::vector<double> cumulative_share_;  // conditional product CDF
};

/// Discretization error metrics of a Poisson(lambda) process on a unit
/// interval split into k timesteps.
struct ErrorReport {
  double err_intervals = 0.0;  ///< expected timesteps with more than one arrival
  double err_missed = 0.0;     ///< expected arrivals beyond the first, summed
  double relative = 0.0;       ///< err_missed / lambda (0 when lambda == 0)
};

/// k - (k + lambda) e^{-lambda/k}
double err_intervals(long long k, double lambda);

/// lambda e^{-lambda/k} + (lambda - k)(1 - e^{-lambda/k})
double err_missed(long long k, double lambda);

/// err_missed / lambda; throws std::domain_error for lambda <= 0.
double relative_error(long long k, double lambda);

ErrorReport error_report(long long k, double lambda);

/// Smallest k >= max(1, ceil(lambda)) with relative_error(k, lambda) <=
/// epsilon, then rounded up to a multiple of `align` so timeslot boundaries
/// fall on timestep boundaries.
long long min_timesteps(double lambda, double epsilon, long long align = 1);

struct McErrorEstimate {
  ErrorReport mean;
  double se_intervals = 0.0;
  double se_missed = 0.0;
  std::size_t samples = 0;
};

/// Monte-Carlo check of the error formulas: simulates Poisson(lambda) paths
/// on (0, 1), bins arrivals into k intervals and averages the two error
/// counts. Samples are split into fixed blocks with derived seeds, so the
/// serial and parallel paths agree exactly.
McErrorEstimate mc_error_oracle(long long k, double lambda,
                                std::size_t n_samples, Rng& rng,
                                Execution exec = Execution::parallel);

}  // namespace evprice
