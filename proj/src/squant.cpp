#include "qcontract/squant.hpp"

#include <cmath>
#include <stdexcept>

namespace qcontract {

ScalarQuantizer::ScalarQuantizer(Interval interval, int bits) : interval_(interval), bits_(bits) {
  if (bits < 0 || bits > kMaxBits) throw std::invalid_argument("scalar quantizer bits out of range");
  if (!(interval.lo <= interval.hi)) throw std::invalid_argument("scalar quantizer interval has lo > hi");
  width_ = std::ldexp(interval.length(), -bits);
}

std::uint64_t ScalarQuantizer::encode(double x) const {
  if (!std::isfinite(x)) throw std::invalid_argument("sq_encode: non-finite input");
  if (width_ == 0.0) return 0;
  const double pos = (interval_.clamp(x) - interval_.lo) / width_;
  const std::uint64_t last = num_cells() - 1;
  if (pos >= static_cast<double>(last)) return last;
  return static_cast<std::uint64_t>(std::floor(pos));
}

double ScalarQuantizer::decode(std::uint64_t index) const {
  if (index >= num_cells()) throw std::out_of_range("sq_decode: index out of range");
  return interval_.lo + (static_cast<double>(index) + 0.5) * width_;
}

double ScalarQuantizer::worst_case_error() const { return sq_worst_case_error(interval_.length(), bits_); }

std::uint64_t sq_encode(const ScalarQuantizer& q, double x) { return q.encode(x); }
double sq_decode(const ScalarQuantizer& q, std::uint64_t index) { return q.decode(index); }

double sq_worst_case_error(double interval_length, int bits) {
  return std::ldexp(interval_length, -(bits + 1));
}

}  // namespace qcontract
