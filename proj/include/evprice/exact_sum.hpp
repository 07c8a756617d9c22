#pragma once

#include <cmath>

namespace evprice {

/// Order-independent sum of prices: accumulates in 2^-64 fixed point
/// (exact for |v| in [2^-12, 2^60)) and rounds once on read. Revenue totals
/// of the same accepted set therefore compare equal bit for bit.
class ExactSum {
 public:
  __extension__ typedef __int128 Fixed;

  static Fixed to_fixed(double v) { return static_cast<Fixed>(std::ldexp(v, 64)); }
  static double to_double(Fixed v) { return std::ldexp(static_cast<double>(v), -64); }

  void add(double v) { acc_ += to_fixed(v); }
  double value() const { return to_double(acc_); }
  Fixed raw() const { return acc_; }

 private:
  Fixed acc_ = 0;
};

}  // namespace evprice
