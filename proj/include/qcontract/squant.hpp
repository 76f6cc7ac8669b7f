#pragma once

#include <cstdint>

#include "qcontract/norms.hpp"

namespace qcontract {

/// Uniform midpoint quantizer with 2^bits cells over a closed interval.
class ScalarQuantizer {
 public:
  static constexpr int kMaxBits = 62;

  ScalarQuantizer() = default;
  ScalarQuantizer(Interval interval, int bits);

  const Interval& interval() const { return interval_; }
  int bits() const { return bits_; }
  std::uint64_t num_cells() const { return std::uint64_t{1} << bits_; }
  double cell_width() const { return width_; }

  /// Out-of-range inputs are clamped onto the interval first.
  std::uint64_t encode(double x) const;
  double decode(std::uint64_t index) const;
  double quantize(double x) const { return decode(encode(x)); }
  double worst_case_error() const;

 private:
  Interval interval_{};
  int bits_ = 0;
  double width_ = 0.0;
};

std::uint64_t sq_encode(const ScalarQuantizer& q, double x);
double sq_decode(const ScalarQuantizer& q, std::uint64_t index);

/// |X| / 2^{bits+1}
double sq_worst_case_error(double interval_length, int bits);

}  // namespace qcontract
