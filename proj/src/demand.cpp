#include "evprice/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace evprice {

IntensityVector::IntensityVector(std::vector<double> rates)
    : rates_(std::move(rates)) {
  for (double r : rates_) {
    if (!std::isfinite(r) || r < 0.0)
      throw std::domain_error("intensity rates must be finite and non-negative");
    total_ += r;
  }
}

Discretization::Discretization(double horizon_hours, int timesteps)
    : horizon_hours_(horizon_hours), timesteps_(timesteps) {
  if (!(horizon_hours > 0.0) || !std::isfinite(horizon_hours))
    throw std::domain_error("horizon must be positive");
  if (timesteps < 1) throw std::domain_error("timesteps must be >= 1");
}

DiscreteDemandProcess::DiscreteDemandProcess(IntensityVector intensity,
                                             Discretization grid,
                                             std::vector<double> step_multipliers)
    : intensity_(std::move(intensity)),
      grid_(grid),
      multipliers_(std::move(step_multipliers)) {
  const int k = grid_.timesteps();
  if (intensity_.total() > k + 1e-12)
    throw std::domain_error("timesteps (" + std::to_string(k) +
                            ") must be at least the total intensity (" +
                            std::to_string(intensity_.total()) + ")");
  if (!multipliers_.empty()) {
    if (multipliers_.size() != static_cast<std::size_t>(k))
      throw std::domain_error("step multiplier table must have one entry per timestep");
    for (double m : multipliers_) {
      if (!std::isfinite(m) || m < 0.0)
        throw std::domain_error("step multipliers must be finite and non-negative");
      if (intensity_.total() * m > k + 1e-12)
        throw std::domain_error("step multiplier pushes the arrival probability above 1");
    }
  }
  cumulative_share_.reserve(intensity_.size());
  double acc = 0.0;
  for (double r : intensity_.rates()) {
    acc += r;
    cumulative_share_.push_back(intensity_.total() > 0.0 ? acc / intensity_.total() : 0.0);
  }
}

double DiscreteDemandProcess::multiplier(int t) const {
  return multipliers_.empty() ? 1.0 : multipliers_[static_cast<std::size_t>(t - 1)];
}

double DiscreteDemandProcess::request_probability(ProductDraw product, int t) const {
  if (t < 1 || t > grid_.timesteps())
    throw std::domain_error("timestep outside [1, k]");
  const double k = grid_.timesteps();
  if (!product) return 1.0 - intensity_.total() * multiplier(t) / k;
  if (*product >= intensity_.size()) throw std::domain_error("invalid product index");
  return intensity_.rate(*product) * multiplier(t) / k;
}

double DiscreteDemandProcess::arrival_probability(int t) const {
  return intensity_.total() * multiplier(t) / grid_.timesteps();
}

std::size_t DiscreteDemandProcess::sample_product(Rng& rng) const {
  const double u = uniform01(rng);
  auto it = std::upper_bound(cumulative_share_.begin(), cumulative_share_.end(), u);
  // guards the top of the CDF against rounding and skips trailing zero rates
  auto idx = static_cast<std::size_t>(it - cumulative_share_.begin());
  if (idx >= cumulative_share_.size()) idx = cumulative_share_.size() - 1;
  while (intensity_.rate(idx) == 0.0 && idx > 0) --idx;
  return idx;
}

ProductDraw DiscreteDemandProcess::sample_step(int t, Rng& rng) const {
  const double p = arrival_probability(t);
  if (p <= 0.0) return std::nullopt;
  const double u = uniform01(rng);
  if (u >= p) return std::nullopt;
  // reuse the draw: u / p is uniform on [0, 1) given an arrival
  const double v = u / p;
  auto it = std::upper_bound(cumulative_share_.begin(), cumulative_share_.end(), v);
  auto idx = static_cast<std::size_t>(it - cumulative_share_.begin());
  if (idx >= cumulative_share_.size()) idx = cumulative_share_.size() - 1;
  while (intensity_.rate(idx) == 0.0 && idx > 0) --idx;
  return idx;
}

std::optional<int> DiscreteDemandProcess::sample_interarrival(int t, Rng& rng) const {
  const int k = grid_.timesteps();
  if (intensity_.total() <= 0.0 || t >= k) return std::nullopt;
  if (homogeneous()) {
    const double p = intensity_.total() / k;
    if (p >= 1.0) return 1;
    std::geometric_distribution<long long> geom(p);
    const long long delta = geom(rng) + 1;
    if (delta > k - t) return std::nullopt;
    return static_cast<int>(delta);
  }
  for (int s = t + 1; s <= k; ++s) {
    if (uniform01(rng) < arrival_probability(s)) return s - t;
  }
  return std::nullopt;
}

namespace {

void check_error_args(long long k, double lambda) {
  if (k < 1) throw std::domain_error("k must be >= 1");
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::domain_error("lambda must be finite and non-negative");
}

// 1 - e^{-x}(1 + x); the series branch avoids cancellation for small x
double beyond_one_probability(double x) {
  if (x < 0.1) {
    double term = -x;  // (-x)^j / j!, starting at j = 1
    double sum = 0.0;
    for (int j = 2; j < 30; ++j) {
      term *= -x / j;
      sum += (j - 1) * term;
    }
    return sum;
  }
  return -std::expm1(-x) - x * std::exp(-x);
}

// x - (1 - e^{-x}), the expected excess E[max(X - 1, 0)] for X ~ Pois(x)
double excess_arrivals(double x) {
  if (x < 0.1) {
    double term = -x;
    double sum = 0.0;
    for (int j = 2; j < 30; ++j) {
      term *= -x / j;
      sum += term;
    }
    return sum;
  }
  return x + std::expm1(-x);
}

}  // namespace

double err_intervals(long long k, double lambda) {
  check_error_args(k, lambda);
  const double kd = static_cast<double>(k);
  return kd * beyond_one_probability(lambda / kd);
}

double err_missed(long long k, double lambda) {
  check_error_args(k, lambda);
  const double kd = static_cast<double>(k);
  return kd * excess_arrivals(lambda / kd);
}

double relative_error(long long k, double lambda) {
  check_error_args(k, lambda);
  if (lambda <= 0.0) throw std::domain_error("relative error undefined for lambda = 0");
  return err_missed(k, lambda) / lambda;
}

ErrorReport error_report(long long k, double lambda) {
  ErrorReport r;
  r.err_intervals = err_intervals(k, lambda);
  r.err_missed = err_missed(k, lambda);
  r.relative = lambda > 0.0 ? r.err_missed / lambda : 0.0;
  return r;
}

long long min_timesteps(double lambda, double epsilon, long long align) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::domain_error("lambda must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("epsilon must lie in (0, 1)");
  if (align < 1) throw std::domain_error("alignment must be >= 1");

  long long lo = std::max<long long>(1, static_cast<long long>(std::ceil(lambda)));
  long long k = lo;
  if (relative_error(lo, lambda) > epsilon) {
    // invariant: relative_error(lo) > epsilon >= relative_error(hi)
    long long hi = lo;
    while (relative_error(hi, lambda) > epsilon) {
      lo = hi;
      hi *= 2;
    }
    while (hi - lo > 1) {
      const long long mid = lo + (hi - lo) / 2;
      if (relative_error(mid, lambda) > epsilon)
        lo = mid;
      else
        hi = mid;
    }
    k = hi;
  }
  return (k + align - 1) / align * align;
}

McErrorEstimate mc_error_oracle(long long k, double lambda, std::size_t n_samples,
                                Rng& rng, Execution exec) {
  check_error_args(k, lambda);
  if (n_samples < 1) throw std::domain_error("n_samples must be >= 1");
  McErrorEstimate out;
  out.samples = n_samples;
  if (lambda == 0.0) return out;

  constexpr std::size_t kBlock = 1024;
  const std::size_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  const std::uint64_t base = rng();

  struct Sums {
    double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
  };
  std::vector<Sums> partial(n_blocks);

  auto run_block = [&](std::size_t b) {
    Rng block_rng = make_rng(derive_seed(base, "mc-error", b));
    std::poisson_distribution<long long> count_dist(lambda);
    std::vector<long long> bins;
    Sums s;
    const std::size_t end = std::min(n_samples, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const long long n = count_dist(block_rng);
      bins.clear();
      for (long long j = 0; j < n; ++j) {
        auto bin = static_cast<long long>(uniform01(block_rng) * static_cast<double>(k));
        bins.push_back(std::min(bin, k - 1));
      }
      std::sort(bins.begin(), bins.end());
      double crowded = 0.0;
      double excess = 0.0;
      for (std::size_t j = 1; j < bins.size(); ++j) {
        if (bins[j] == bins[j - 1]) {
          excess += 1.0;
          if (j == 1 || bins[j - 1] != bins[j - 2]) crowded += 1.0;
        }
      }
      s.s1 += crowded;
      s.s1sq += crowded * crowded;
      s.s2 += excess;
      s.s2sq += excess * excess;
    }
    partial[b] = s;
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  }

  Sums total;
  for (const auto& s : partial) {
    total.s1 += s.s1;
    total.s1sq += s.s1sq;
    total.s2 += s.s2;
    total.s2sq += s.s2sq;
  }
  const double n = static_cast<double>(n_samples);
  auto se = [n](double sum, double sumsq) {
    if (n < 2) return 0.0;
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1));
    return std::sqrt(var / n);
  };
  out.mean.err_intervals = total.s1 / n;
  out.mean.err_missed = total.s2 / n;
  out.mean.relative = out.mean.err_missed / lambda;
  out.se_intervals = se(total.s1, total.s1sq);
  out.se_missed = se(total.s2, total.s2sq);
  return out;
}

}  // namespace evprice
