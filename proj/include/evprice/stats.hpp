#pragma once

#include <cstddef>
#include <span>

namespace evprice {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;      ///< sample standard deviation (n - 1 denominator)
  double ci95 = 0.0;    ///< half-width of the normal-approximation 95% interval

  double std_error() const;
};

Summary summarize(std::span<const double> values);

/// Standard normal CDF.
double normal_cdf(double z);

}  // namespace evprice
