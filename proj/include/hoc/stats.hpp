#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace hoc {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.carry_);
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error = 0.0;
};

/// Two-pass mean and variance with compensated sums.
inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  CompensatedSum total;
  for (double v : values) total.add(v);
  s.mean = total.value() / static_cast<double>(s.count);
  if (s.count < 2) return s;
  CompensatedSum sq;
  for (double v : values) sq.add((v - s.mean) * (v - s.mean));
  s.variance = sq.value() / static_cast<double>(s.count - 1);
  s.standard_error = std::sqrt(s.variance / static_cast<double>(s.count));
  return s;
}

}  // namespace hoc
