#include "evprice/stats.hpp"

#include <cmath>

namespace evprice {

double Summary::std_error() const {
  return n > 0 ? sd / std::sqrt(static_cast<double>(n)) : 0.0;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  double m2 = 0.0;
  for (double v : values) {
    ++s.n;
    const double delta = v - s.mean;
    s.mean += delta / static_cast<double>(s.n);
    m2 += delta * (v - s.mean);
  }
  if (s.n > 1) {
    s.sd = std::sqrt(m2 / static_cast<double>(s.n - 1));
    s.ci95 = 1.959963984540054 * s.std_error();
  }
  return s;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace evprice
