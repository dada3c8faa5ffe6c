#pragma once

// Rank-1 lattice rules, the weighted Korobov worst-case error for SPOD
// weights, and component-by-component construction of generating vectors.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "domainuq/combinatorics.hpp"
#include "domainuq/error.hpp"
#include "domainuq/format.hpp"
#include "domainuq/numerics.hpp"
#include "domainuq/random_field.hpp"

namespace domainuq::lattice {

struct LatticeRule {
  std::uint64_t n = 1;
  std::vector<std::uint64_t> z;

  std::size_t dimension() const noexcept { return z.size(); }

  void validate() const {
    if (!is_prime(n)) throw Error(ErrorKind::NotPrime, "n = " + std::to_string(n) + " must be prime");
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (z[j] < 1 || z[j] >= n) {
        throw Error(ErrorKind::InvalidArgument, "z_" + std::to_string(j + 1) + " = " + std::to_string(z[j]) +
                                                    " outside {1, ..., n-1}");
      }
    }
  }

  /// Point i in {1, ..., n}: ((i z) mod n) / n componentwise.
  void point(std::uint64_t i, std::span<double> out) const {
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < z.size(); ++j) out[j] = static_cast<double>((i % n) * z[j] % n) / dn;
  }

  std::vector<double> point(std::uint64_t i) const {
    std::vector<double> y(z.size());
    point(i, y);
    return y;
  }
};

inline std::vector<std::vector<double>> lattice_points(const LatticeRule& rule) {
  std::vector<std::vector<double>> pts;
  pts.reserve(rule.n);
  for (std::uint64_t i = 1; i <= rule.n; ++i) pts.push_back(rule.point(i));
  return pts;
}

inline void check_alpha(int alpha) {
  if (alpha != 2 && alpha != 4 && alpha != 6) {
    throw Error(ErrorKind::UnsupportedAlpha, "alpha must be one of {2, 4, 6}, got " + std::to_string(alpha));
  }
}

/// Odd smoothness orders have no Bernoulli closed form for the kernel;
/// they are raised to the next even integer.
inline int effective_alpha(int alpha) {
  if (alpha < 1) throw Error(ErrorKind::UnsupportedAlpha, "alpha must be positive");
  const int even = alpha % 2 == 0 ? alpha : alpha + 1;
  check_alpha(std::max(even, 2));
  return std::max(even, 2);
}

/// omega_alpha(x) = sum_{h != 0} e^{2 pi i h x} / |h|^alpha, evaluated through
/// the Bernoulli polynomial B_alpha.
inline double korobov_kernel(int alpha, double x) {
  check_alpha(alpha);
  const double two_pi = 2.0 * std::numbers::pi;
  switch (alpha) {
    case 2: {
      const double b2 = x * x - x + 1.0 / 6.0;
      return two_pi * two_pi / 2.0 * b2;
    }
    case 4: {
      const double x2 = x * x;
      const double b4 = x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0;
      return -std::pow(two_pi, 4) / 24.0 * b4;
    }
    default: {
      const double x2 = x * x;
      const double b6 = x2 * x2 * x2 - 3.0 * x2 * x2 * x + 2.5 * x2 * x2 - 0.5 * x2 + 1.0 / 42.0;
      return std::pow(two_pi, 6) / 720.0 * b6;
    }
  }
}

/// omega_alpha(r / n) for r = 0..n-1, mirrored so that entry r and n-r are
/// bitwise equal.
inline std::vector<double> kernel_table(int alpha, std::uint64_t n) {
  std::vector<double> t(n);
  for (std::uint64_t r = 0; r <= n / 2; ++r) {
    t[r] = korobov_kernel(alpha, static_cast<double>(r) / static_cast<double>(n));
    if (r != 0) t[n - r] = t[r];
  }
  return t;
}

/// SPOD weights
///   gamma_u = sum_{m_u in {1:alpha}^|u|} Gamma(|m_u|) prod_{j in u} gamma_{j,m_j},
///   gamma_{j,m} = Ctilde^alpha m! beta_j^m S(alpha, m),
///   Gamma(l) = (l + d - 1)! / (d - 1)!.
struct SpodWeightParams {
  int alpha = 2;
  int d = 2;
  double c_tilde = 1.0;
  std::vector<double> beta;
  std::vector<std::vector<double>> gamma_jm;  ///< [j-1][m-1]

  std::size_t dimension() const noexcept { return gamma_jm.size(); }

  /// Gamma(l) as a double (may overflow for very large l).
  double order_factor(unsigned l) const {
    double r = 1.0;
    for (unsigned i = static_cast<unsigned>(d); i <= l + static_cast<unsigned>(d) - 1; ++i) r *= i;
    return r;
  }

  /// Gamma(l) / Gamma(l - m), a short product that never overflows in
  /// practice.
  double order_ratio(unsigned l, unsigned m) const {
    double r = 1.0;
    for (unsigned i = l - m + static_cast<unsigned>(d); i <= l + static_cast<unsigned>(d) - 1; ++i) r *= i;
    return r;
  }

  SpodWeightParams truncated(std::size_t s) const {
    SpodWeightParams out = *this;
    out.gamma_jm.resize(std::min(s, gamma_jm.size()));
    out.beta.resize(std::min(s, beta.size()));
    return out;
  }

  /// gamma_u for a set of 1-based dimensions, through the polynomial
  /// prod_j (sum_m gamma_{j,m} t^m).
  double set_weight(std::span<const std::size_t> u) const {
    if (u.empty()) return 1.0;
    std::vector<double> poly{1.0};
    for (std::size_t j : u) {
      std::vector<double> next(poly.size() + alpha, 0.0);
      for (std::size_t l = 0; l < poly.size(); ++l) {
        for (int m = 1; m <= alpha; ++m) next[l + m] += poly[l] * gamma_jm.at(j - 1)[m - 1];
      }
      poly = std::move(next);
    }
    double total = 0.0;
    for (std::size_t l = 1; l < poly.size(); ++l) total += order_factor(static_cast<unsigned>(l)) * poly[l];
    return total;
  }
};

/// Ctilde = 2 d! (2 + xi_b)^d (1 + xi_b)^3 / sigma_min^{d+4}.
inline double spod_c_tilde(double xi_b, int d, double sigma_min) {
  return 2.0 * factorial(static_cast<unsigned>(d)) * std::pow(2.0 + xi_b, d) * std::pow(1.0 + xi_b, 3) /
         std::pow(sigma_min, d + 4);
}

inline SpodWeightParams build_spod_params(const field::BSequence& b, int alpha, int d, double sigma_min,
                                          double rho) {
  alpha = effective_alpha(alpha);
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "spatial dimension must be >= 1");
  if (!(sigma_min > 0.0 && sigma_min <= 1.0)) throw Error(ErrorKind::InvalidArgument, "sigma_min must lie in (0, 1]");
  if (!(rho >= 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must be >= 1");
  if (!std::isfinite(b.xi_b)) throw Error(ErrorKind::ThetaTooSmall, "xi_b diverges; SPOD weights need theta > 2");

  SpodWeightParams p;
  p.alpha = alpha;
  p.d = d;
  p.c_tilde = spod_c_tilde(b.xi_b, d, sigma_min);
  const double beta_scale = (2.0 + std::sqrt(2.0)) * std::max(1.0 + std::sqrt(3.0), rho);
  const double c_pow = std::pow(p.c_tilde, alpha);
  p.beta.resize(b.b.size());
  p.gamma_jm.assign(b.b.size(), std::vector<double>(alpha));
  for (std::size_t j = 0; j < b.b.size(); ++j) {
    p.beta[j] = beta_scale * b.b[j];
    for (int m = 1; m <= alpha; ++m) {
      const double stirling = combinatorics::stirling2(alpha, m).convert_to<double>();
      p.gamma_jm[j][m - 1] = c_pow * factorial(m) * std::pow(p.beta[j], m) * stirling;
      if (!std::isfinite(p.gamma_jm[j][m - 1])) {
        throw Error(ErrorKind::NumericalOverflow, "SPOD factor gamma_{j,m} is not finite");
      }
    }
  }
  return p;
}

/// Weights for a cosine-family field whose b sequence is rebuilt with the
/// amplitude replaced by `weight_amplitude`.
inline SpodWeightParams build_spod_params(const field::FieldSpec& spec, int alpha, int d, double sigma_min,
                                          double rho, double weight_amplitude) {
  field::FieldSpec scaled = spec;
  scaled.amplitude = weight_amplitude;
  return build_spod_params(field::b_sequence(scaled), alpha, d, sigma_min, rho);
}

struct WorstCaseError {
  double e_squared = 0.0;
  std::uint64_t n = 0;
  std::size_t s = 0;
  int alpha = 2;
};

namespace detail {

/// Per-node state R_j(k, l) = Gamma(l) P_j(k, l) for l = 0..alpha*j, stored
/// row-major with a fixed stride of alpha*s_max + 1.
class SpodState {
 public:
  SpodState(std::uint64_t n, std::size_t s_max, int alpha)
      : n_(n), stride_(static_cast<std::size_t>(alpha) * s_max + 1), data_(n * stride_, 0.0) {
    for (std::uint64_t k = 0; k < n; ++k) data_[k * stride_] = 1.0;
  }

  std::span<double> row(std::uint64_t k) { return {data_.data() + k * stride_, stride_}; }
  std::span<const double> row(std::uint64_t k) const { return {data_.data() + k * stride_, stride_}; }
  std::uint64_t n() const noexcept { return n_; }

 private:
  std::uint64_t n_;
  std::size_t stride_;
  std::vector<double> data_;
};

/// sum_l sum_m gamma_{j,m} Gamma(l)/Gamma(l-m) R_{j-1}(k, l-m), the
/// coefficient multiplying the new kernel value in dimension j (1-based).
inline double increment_coefficient(const SpodWeightParams& p, std::size_t j, std::span<const double> row) {
  const std::size_t top = static_cast<std::size_t>(p.alpha) * j;
  double total = 0.0;
  for (std::size_t l = 1; l <= top; ++l) {
    for (int m = 1; m <= p.alpha && static_cast<std::size_t>(m) <= l; ++m) {
      total += p.gamma_jm[j - 1][m - 1] * p.order_ratio(static_cast<unsigned>(l), m) * row[l - m];
    }
  }
  return total;
}

inline void advance_row(const SpodWeightParams& p, std::size_t j, double kernel_value, std::span<double> row) {
  const std::size_t top = static_cast<std::size_t>(p.alpha) * j;
  // descending l so that row[l - m] still holds R_{j-1}
  for (std::size_t l = top; l >= 1; --l) {
    double inc = 0.0;
    for (int m = 1; m <= p.alpha && static_cast<std::size_t>(m) <= l; ++m) {
      inc += p.gamma_jm[j - 1][m - 1] * p.order_ratio(static_cast<unsigned>(l), m) * row[l - m];
    }
    row[l] += kernel_value * inc;
  }
}

inline double state_mean(const SpodState& state, std::size_t j, int alpha) {
  const std::size_t top = static_cast<std::size_t>(alpha) * j;
  CompensatedSum acc;
  for (std::uint64_t k = 0; k < state.n(); ++k) {
    const auto row = state.row(k);
    for (std::size_t l = 1; l <= top; ++l) acc.add(row[l]);
  }
  return acc.value() / static_cast<double>(state.n());
}

}  // namespace detail

/// e^2 = (1/n) sum_k sum_{l>=1} Gamma(l) P_s(k, l) with the SPOD state
/// recursion over dimensions.
inline WorstCaseError worst_case_error_sq(const LatticeRule& rule, const SpodWeightParams& params) {
  if (params.dimension() < rule.dimension()) {
    throw Error(ErrorKind::InvalidArgument, "weights cover fewer dimensions than the rule");
  }
  check_alpha(params.alpha);
  const std::uint64_t n = rule.n;
  const std::size_t s = rule.dimension();
  const auto omega = kernel_table(params.alpha, n);
  detail::SpodState state(n, s, params.alpha);
  for (std::size_t j = 1; j <= s; ++j) {
    const std::uint64_t zj = rule.z[j - 1] % n;
    for (std::uint64_t k = 0; k < n; ++k) {
      detail::advance_row(params, j, omega[(k * zj) % n], state.row(k));
    }
  }
  const double e2 = s == 0 ? 0.0 : detail::state_mean(state, s, params.alpha);
  if (!std::isfinite(e2)) throw Error(ErrorKind::NumericalOverflow, "worst-case error is not finite");
  return {e2, n, s, params.alpha};
}

enum class CbcMethod { Auto, Naive, Fast };

/// Gap, relative to the rounding scale of the scores, below which two CBC
/// candidates are treated as equal.
inline constexpr double kCbcTieTolerance = 1e-12;

struct CbcResult {
  LatticeRule rule;
  std::vector<double> e2_after;  ///< e^2 of the rule truncated to j dimensions
};

/// Smallest primitive root modulo the prime n.
inline std::uint64_t primitive_root(std::uint64_t n) {
  if (n == 2) return 1;
  const std::uint64_t phi = n - 1;
  std::vector<std::uint64_t> factors;
  std::uint64_t rest = phi;
  for (std::uint64_t p = 2; p * p <= rest; ++p) {
    if (rest % p == 0) {
      factors.push_back(p);
      while (rest % p == 0) rest /= p;
    }
  }
  if (rest > 1) factors.push_back(rest);
  auto powmod = [n](std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1;
    b %= n;
    while (e) {
      if (e & 1) r = static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) * b) % n);
      b = static_cast<std::uint64_t>((static_cast<unsigned __int128>(b) * b) % n);
      e >>= 1;
    }
    return r;
  };
  for (std::uint64_t g = 2; g < n; ++g) {
    bool ok = true;
    for (auto p : factors) {
      if (powmod(g, phi / p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw Error(ErrorKind::NotPrime, "no primitive root modulo " + std::to_string(n));
}

namespace detail {

// FFTW's planner is not re-entrant
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// Evaluates E(z) = sum_{k=0}^{n-1} omega[(k z) mod n] q[k] for every z in
/// 1..n-1 by a cyclic convolution of length n-1 over the multiplicative
/// group (Rader's reordering), done with FFTW.
class CyclicKernelProduct {
 public:
  CyclicKernelProduct(const std::vector<double>& omega, std::uint64_t n) : n_(n), m_(n - 1), omega0_(omega[0]) {
    const std::uint64_t g = primitive_root(n);
    perm_.resize(m_);
    inv_perm_.resize(m_);
    std::uint64_t power = 1;
    for (std::uint64_t c = 0; c < m_; ++c) {
      perm_[c] = power;  // g^c
      power = power * g % n;
    }
    // g^{-b} = g^{(m - b) mod m}
    for (std::uint64_t b = 0; b < m_; ++b) inv_perm_[b] = perm_[(m_ - b) % m_];

    const std::size_t half = m_ / 2 + 1;
    real_ = fftw_alloc_real(m_);
    spec_x_ = fftw_alloc_complex(half);
    spec_y_ = fftw_alloc_complex(half);
    {
      std::lock_guard lock(fftw_planner_mutex());
      fwd_x_ = fftw_plan_dft_r2c_1d(static_cast<int>(m_), real_, spec_x_, FFTW_ESTIMATE);
      fwd_y_ = fftw_plan_dft_r2c_1d(static_cast<int>(m_), real_, spec_y_, FFTW_ESTIMATE);
      inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(m_), spec_y_, real_, FFTW_ESTIMATE);
    }
    for (std::uint64_t c = 0; c < m_; ++c) real_[c] = omega[perm_[c]];
    fftw_execute(fwd_x_);
  }

  CyclicKernelProduct(const CyclicKernelProduct&) = delete;
  CyclicKernelProduct& operator=(const CyclicKernelProduct&) = delete;

  ~CyclicKernelProduct() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_x_);
    fftw_destroy_plan(fwd_y_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(spec_x_);
    fftw_free(spec_y_);
  }

  /// Returns E(z) indexed by z (entry 0 unused).
  std::vector<double> evaluate(std::span<const double> q) {
    for (std::uint64_t b = 0; b < m_; ++b) real_[b] = q[inv_perm_[b]];
    fftw_execute(fwd_y_);
    const std::size_t half = m_ / 2 + 1;
    for (std::size_t i = 0; i < half; ++i) {
      const double ar = spec_x_[i][0], ai = spec_x_[i][1];
      const double br = spec_y_[i][0], bi = spec_y_[i][1];
      spec_y_[i][0] = ar * br - ai * bi;
      spec_y_[i][1] = ar * bi + ai * br;
    }
    fftw_execute(inv_);
    std::vector<double> out(n_, 0.0);
    const double base = omega0_ * q[0];
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::uint64_t a = 0; a < m_; ++a) out[perm_[a]] = base + real_[a] * scale;
    return out;
  }

 private:
  std::uint64_t n_;
  std::uint64_t m_;
  double omega0_;
  std::vector<std::uint64_t> perm_;
  std::vector<std::uint64_t> inv_perm_;
  double* real_ = nullptr;
  fftw_complex* spec_x_ = nullptr;
  fftw_complex* spec_y_ = nullptr;
  fftw_plan fwd_x_ = nullptr;
  fftw_plan fwd_y_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace detail

/// Greedy CBC: for j = 1..s pick z_j minimizing e^2 of the j-dimensional
/// rule with z_1..z_{j-1} fixed. Candidates z and n-z give the same error
/// (the kernel is symmetric), so only z <= (n-1)/2 is searched; ties go to
/// the smallest z.
inline CbcResult cbc_run(std::uint64_t n, std::size_t s, const SpodWeightParams& params,
                         CbcMethod method = CbcMethod::Auto, unsigned threads = 1) {
  if (s == 0) throw Error(ErrorKind::DimensionZero, "CBC needs s >= 1");
  if (!is_prime(n)) throw Error(ErrorKind::NotPrime, "n = " + std::to_string(n) + " must be prime");
  if (params.dimension() < s) throw Error(ErrorKind::InvalidArgument, "weights cover fewer than s dimensions");
  check_alpha(params.alpha);
  if (method == CbcMethod::Auto) method = n > 512 ? CbcMethod::Fast : CbcMethod::Naive;
  if (n < 5) method = CbcMethod::Naive;
  threads = std::max(1u, threads);

  const auto omega = kernel_table(params.alpha, n);
  const std::uint64_t last_candidate = n == 2 ? 1 : (n - 1) / 2;
  detail::SpodState state(n, s, params.alpha);
  std::vector<double> q(n);
  std::unique_ptr<detail::CyclicKernelProduct> fast;
  if (method == CbcMethod::Fast) fast = std::make_unique<detail::CyclicKernelProduct>(omega, n);

  CbcResult result;
  result.rule.n = n;
  for (std::size_t j = 1; j <= s; ++j) {
    for (std::uint64_t k = 0; k < n; ++k) q[k] = detail::increment_coefficient(params, j, state.row(k));

    std::vector<double> score(last_candidate + 1, 0.0);
    if (fast) {
      const auto all = fast->evaluate(q);
      for (std::uint64_t z = 1; z <= last_candidate; ++z) score[z] = all[z];
    } else {
      auto work = [&](std::uint64_t first, std::uint64_t stride) {
        for (std::uint64_t z = first; z <= last_candidate; z += stride) {
          double acc = 0.0;
          std::uint64_t idx = 0;
          for (std::uint64_t k = 0; k < n; ++k) {
            acc += omega[idx] * q[k];
            idx += z;
            if (idx >= n) idx -= n;
          }
          score[z] = acc;
        }
      };
      if (threads == 1) {
        work(1, 1);
      } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, 1 + t, threads);
      }
    }
    // scores equal up to rounding count as ties and go to the smallest z;
    // the rounding scale is sum_k |omega_k| max_k |q_k|, not the size of the
    // scores themselves, which can cancel to far below it
    double lowest = score[1];
    for (std::uint64_t z = 1; z <= last_candidate; ++z) lowest = std::min(lowest, score[z]);
    double omega_l1 = 0.0, q_max = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
      omega_l1 += std::abs(omega[k]);
      q_max = std::max(q_max, std::abs(q[k]));
    }
    const double scale = omega_l1 * q_max;
    std::uint64_t best = 1;
    while (score[best] > lowest + kCbcTieTolerance * scale) ++best;
    result.rule.z.push_back(best);
    for (std::uint64_t k = 0; k < n; ++k) detail::advance_row(params, j, omega[(k * best) % n], state.row(k));
    const double e2 = detail::state_mean(state, j, params.alpha);
    if (!std::isfinite(e2)) throw Error(ErrorKind::NumericalOverflow, "worst-case error is not finite");
    result.e2_after.push_back(e2);
  }
  return result;
}

inline LatticeRule cbc_construct(std::uint64_t n, std::size_t s, const SpodWeightParams& params,
                                 CbcMethod method = CbcMethod::Auto) {
  return cbc_run(n, s, params, method).rule;
}

/// C(lambda, s) evaluated through the SPOD recursion with every term raised
/// to lambda and the kernel replaced by 2 zeta(alpha lambda):
///   sum_u sum_{m_u} (Gamma(|m_u|) prod gamma_{j,m_j})^lambda (2 zeta(alpha lambda))^|u|.
/// At lambda = 1 this is exactly sum_u gamma_u (2 zeta(alpha))^|u|; for
/// lambda < 1 it bounds sum_u gamma_u^lambda (2 zeta(alpha lambda))^|u| from above.
inline double error_bound_constant(const SpodWeightParams& params, double lambda, std::size_t s) {
  if (!(lambda > 1.0 / params.alpha && lambda <= 1.0)) {
    throw Error(ErrorKind::LambdaOutOfRange, "lambda must lie in (1/alpha, 1]");
  }
  if (params.dimension() < s) throw Error(ErrorKind::InvalidArgument, "weights cover fewer than s dimensions");
  const double kernel = 2.0 * riemann_zeta(params.alpha * lambda);
  std::vector<double> row(static_cast<std::size_t>(params.alpha) * s + 1, 0.0);
  row[0] = 1.0;
  for (std::size_t j = 1; j <= s; ++j) {
    const std::size_t top = static_cast<std::size_t>(params.alpha) * j;
    for (std::size_t l = top; l >= 1; --l) {
      double inc = 0.0;
      for (int m = 1; m <= params.alpha && static_cast<std::size_t>(m) <= l; ++m) {
        inc += std::pow(params.gamma_jm[j - 1][m - 1] * params.order_ratio(static_cast<unsigned>(l), m), lambda) *
               row[l - m];
      }
      row[l] += kernel * inc;
    }
  }
  CompensatedSum acc;
  for (std::size_t l = 1; l < row.size(); ++l) acc.add(row[l]);
  return acc.value();
}

/// sum over nonempty u of gamma_u^lambda (2 zeta(alpha lambda))^|u| by subset
/// enumeration; limited to s <= 20.
inline double error_bound_constant_exact(const SpodWeightParams& params, double lambda, std::size_t s) {
  if (!(lambda > 1.0 / params.alpha && lambda <= 1.0)) {
    throw Error(ErrorKind::LambdaOutOfRange, "lambda must lie in (1/alpha, 1]");
  }
  if (s > 20) throw Error(ErrorKind::InvalidArgument, "exact enumeration limited to s <= 20");
  const double kernel = 2.0 * riemann_zeta(params.alpha * lambda);
  CompensatedSum acc;
  std::vector<std::size_t> u;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << s); ++mask) {
    u.clear();
    for (std::size_t j = 0; j < s; ++j) {
      if (mask & (std::uint64_t{1} << j)) u.push_back(j + 1);
    }
    acc.add(std::pow(params.set_weight(u), lambda) * std::pow(kernel, static_cast<double>(u.size())));
  }
  return acc.value();
}

/// (C(lambda, s) / (n - 1))^{1/lambda}
inline double cbc_error_bound(const SpodWeightParams& params, double lambda, std::size_t s, std::uint64_t n) {
  return std::pow(error_bound_constant(params, lambda, s) / static_cast<double>(n - 1), 1.0 / lambda);
}

// Generating-vector file: first line "n s alpha", then one z_j per line.

inline std::string generating_vector_text(const LatticeRule& rule, int alpha) {
  std::ostringstream os;
  os << rule.n << ' ' << rule.dimension() << ' ' << alpha << '\n';
  for (auto zj : rule.z) os << zj << '\n';
  return os.str();
}

inline void save_generating_vector(const std::string& path, const LatticeRule& rule, int alpha) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out << generating_vector_text(rule, alpha);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path + "'");
}

struct LoadedGeneratingVector {
  LatticeRule rule;
  int alpha = 2;
};

inline LoadedGeneratingVector parse_generating_vector(std::istream& in) {
  LoadedGeneratingVector out;
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::Config, "generating-vector file is empty");
  std::istringstream hs(header);
  long long n = 0, s = 0;
  if (!(hs >> n >> s >> out.alpha) || n < 2 || s < 1) {
    throw Error(ErrorKind::Config, "malformed header '" + header + "'");
  }
  std::string trailing;
  if (hs >> trailing) throw Error(ErrorKind::Config, "malformed header '" + header + "'");
  check_alpha(out.alpha);
  out.rule.n = static_cast<std::uint64_t>(n);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    long long zj = 0;
    if (!(ls >> zj) || (ls >> trailing)) throw Error(ErrorKind::Config, "malformed entry '" + line + "'");
    if (zj < 1 || zj >= n) throw Error(ErrorKind::Config, "entry " + line + " outside {1, ..., n-1}");
    out.rule.z.push_back(static_cast<std::uint64_t>(zj));
  }
  if (out.rule.z.size() != static_cast<std::size_t>(s)) {
    throw Error(ErrorKind::Config, "expected " + std::to_string(s) + " entries, found " +
                                       std::to_string(out.rule.z.size()));
  }
  if (!is_prime(out.rule.n)) throw Error(ErrorKind::NotPrime, "n = " + std::to_string(n) + " must be prime");
  return out;
}

inline LoadedGeneratingVector load_generating_vector(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_generating_vector(in);
}

/// CSV with columns j, z_j, e2 (error of the rule truncated to j dimensions).
inline std::string cbc_history_csv(const CbcResult& result) {
  std::ostringstream os;
  os << "j,z_j,e2\n";
  for (std::size_t j = 0; j < result.rule.z.size(); ++j) {
    os << (j + 1) << ',' << result.rule.z[j] << ',' << format_double(result.e2_after[j]) << '\n';
  }
  return os.str();
}

}  // namespace domainuq::lattice
