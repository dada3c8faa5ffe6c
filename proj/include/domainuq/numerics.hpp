#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "domainuq/error.hpp"

namespace domainuq {

/// Neumaier's variant of Kahan summation. Summation order is the call
/// order, so results are reproducible whenever the caller fixes that order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Elementwise accumulator of equally sized vectors with per-entry
/// compensation.
class CompensatedVectorSum {
 public:
  explicit CompensatedVectorSum(std::size_t width) : sums_(width), comps_(width) {}

  void add(std::span<const double> x) {
    for (std::size_t i = 0; i < sums_.size(); ++i) {
      const double s = sums_[i];
      const double t = s + x[i];
      if (std::abs(s) >= std::abs(x[i])) {
        comps_[i] += (s - t) + x[i];
      } else {
        comps_[i] += (x[i] - t) + s;
      }
      sums_[i] = t;
    }
  }

  std::vector<double> values(double scale = 1.0) const {
    std::vector<double> out(sums_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sums_[i] + comps_[i]) * scale;
    return out;
  }

  std::size_t width() const noexcept { return sums_.size(); }

 private:
  std::vector<double> sums_;
  std::vector<double> comps_;
};

inline bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  if (n < 4) return true;
  if (n % 2 == 0 || n % 3 == 0) return false;
  for (std::uint64_t d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

/// Riemann zeta for real s > 1: a short direct sum followed by the
/// Euler-Maclaurin tail (integral, boundary and five Bernoulli corrections).
inline double riemann_zeta(double s) {
  if (!(s > 1.0)) throw Error(ErrorKind::ThetaTooSmall, "zeta(s) requires s > 1, got " + std::to_string(s));
  constexpr int kTerms = 100;
  CompensatedSum acc;
  for (int k = kTerms - 1; k >= 1; --k) acc.add(std::pow(static_cast<double>(k), -s));
  const double N = kTerms;
  acc.add(std::pow(N, 1.0 - s) / (s - 1.0));
  acc.add(0.5 * std::pow(N, -s));
  // B_{2j} / (2j)!
  constexpr double kCoeff[] = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0,
                               1.0 / 47900160.0};
  double rising = s;  // s (s+1) ... (s+2j-2)
  double power = std::pow(N, -s - 1.0);
  for (int j = 0; j < 5; ++j) {
    acc.add(kCoeff[j] * rising * power);
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    power /= N * N;
  }
  return acc.value();
}

/// (n)! as a double; exact up to 22!.
inline double factorial(unsigned n) noexcept {
  double r = 1.0;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace domainuq
