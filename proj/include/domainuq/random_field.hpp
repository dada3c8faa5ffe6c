#pragma once

// Periodic domain perturbation V(x,y) = x + 6^{-1/2} sum_i sin(2 pi y_i) psi_i(x)
// on the unit square, its Jacobian, and the coefficients of the problem
// transported back to the reference square.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "domainuq/error.hpp"
#include "domainuq/numerics.hpp"

namespace domainuq::field {

using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;

enum class Family {
  CosineVertical,  ///< psi_j(x) = c j^{-theta} (0, x2 cos(j pi x1))
  Custom,          ///< caller-supplied psi_j, psi_j' and b_j
};

/// Caller-supplied fluctuation family; indices j are 1-based.
struct CustomFluctuations {
  std::function<Point(std::size_t, const Point&)> psi;
  std::function<Matrix2(std::size_t, const Point&)> dpsi;
  std::function<double(std::size_t)> b;
};

struct FieldSpec {
  double theta = 2.0;
  double amplitude = 1.0;  ///< c
  std::size_t s = 1;
  Family family = Family::CosineVertical;
  std::shared_ptr<const CustomFluctuations> custom;

  void validate() const {
    if (!(theta > 1.0)) throw Error(ErrorKind::ThetaTooSmall, "theta must exceed 1");
    // c = 0 is accepted as the unperturbed limit
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
      throw Error(ErrorKind::InvalidArgument, "amplitude must be finite and non-negative");
    }
    if (s == 0) throw Error(ErrorKind::DimensionZero, "field needs s >= 1");
    if (family == Family::Custom && (!custom || !custom->psi || !custom->dpsi || !custom->b)) {
      throw Error(ErrorKind::InvalidArgument, "custom family requires psi, dpsi and b");
    }
  }
};

inline void to_json(nlohmann::json& j, const FieldSpec& f) {
  if (f.family != Family::CosineVertical) {
    throw Error(ErrorKind::Config, "only the cosine_vertical family is serializable");
  }
  j = nlohmann::json{{"theta", f.theta}, {"c", f.amplitude}, {"s", f.s}, {"family", "cosine_vertical"}};
}

inline void from_json(const nlohmann::json& j, FieldSpec& f) {
  if (!j.is_object()) throw Error(ErrorKind::Config, "field must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "theta" && key != "c" && key != "s" && key != "family") {
      throw Error(ErrorKind::Config, "unknown field key '" + key + "'");
    }
  }
  try {
    f.theta = j.at("theta").get<double>();
    f.amplitude = j.at("c").get<double>();
    f.s = j.at("s").get<std::size_t>();
    const std::string family = j.value("family", std::string("cosine_vertical"));
    if (family != "cosine_vertical") throw Error(ErrorKind::Config, "unsupported family '" + family + "'");
    f.family = Family::CosineVertical;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("field: ") + e.what());
  }
  f.validate();
}

inline Point fluctuation(const FieldSpec& spec, std::size_t j, const Point& x) {
  if (spec.family == Family::Custom) return spec.custom->psi(j, x);
  const double scale = spec.amplitude * std::pow(static_cast<double>(j), -spec.theta);
  return {0.0, scale * x[1] * std::cos(j * std::numbers::pi * x[0])};
}

inline Matrix2 fluctuation_jacobian(const FieldSpec& spec, std::size_t j, const Point& x) {
  if (spec.family == Family::Custom) return spec.custom->dpsi(j, x);
  const double scale = spec.amplitude * std::pow(static_cast<double>(j), -spec.theta);
  const double arg = j * std::numbers::pi * x[0];
  Matrix2 d;
  d << 0.0, 0.0, -scale * j * std::numbers::pi * x[1] * std::sin(arg), scale * std::cos(arg);
  return d;
}

/// The field frozen at one parameter vector y. Precomputes the per-term
/// weights so that repeated evaluation over a mesh is cheap.
class Realization {
 public:
  Realization(const FieldSpec& spec, std::span<const double> y) : spec_(spec) {
    spec.validate();
    if (y.size() != spec.s) {
      throw Error(ErrorKind::InvalidArgument,
                  "parameter vector has " + std::to_string(y.size()) + " entries, field has s = " +
                      std::to_string(spec.s));
    }
    weights_.resize(spec.s);
    const double inv_sqrt6 = 1.0 / std::sqrt(6.0);
    for (std::size_t i = 0; i < spec.s; ++i) {
      const double sine = std::sin(2.0 * std::numbers::pi * y[i]) * inv_sqrt6;
      if (spec.family == Family::CosineVertical) {
        weights_[i] = sine * spec.amplitude * std::pow(static_cast<double>(i + 1), -spec.theta);
      } else {
        weights_[i] = sine;
      }
    }
  }

  const FieldSpec& spec() const noexcept { return spec_; }

  /// Upper boundary height a(x1, y) of the cosine family.
  double top_height(double x1) const { return 1.0 + vertical_profile(x1); }

  Point displacement(const Point& x) const {
    if (spec_.family == Family::CosineVertical) {
      return {x[0], x[1] * (1.0 + vertical_profile(x[0]))};
    }
    Point v = x;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] != 0.0) v += weights_[i] * spec_.custom->psi(i + 1, x);
    }
    return v;
  }

  Matrix2 jacobian(const Point& x) const {
    if (spec_.family == Family::CosineVertical) {
      double g = 0.0;
      double dg = 0.0;
      for (std::size_t i = 0; i < weights_.size(); ++i) {
        const double jpi = static_cast<double>(i + 1) * std::numbers::pi;
        g += weights_[i] * std::cos(jpi * x[0]);
        dg -= weights_[i] * jpi * std::sin(jpi * x[0]);
      }
      Matrix2 jac;
      jac << 1.0, 0.0, x[1] * dg, 1.0 + g;
      return jac;
    }
    Matrix2 jac = Matrix2::Identity();
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      if (weights_[i] != 0.0) jac += weights_[i] * spec_.custom->dpsi(i + 1, x);
    }
    return jac;
  }

 private:
  double vertical_profile(double x1) const {
    double g = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      g += weights_[i] * std::cos(static_cast<double>(i + 1) * std::numbers::pi * x1);
    }
    return g;
  }

  FieldSpec spec_;
  std::vector<double> weights_;
};

inline Point displacement(const FieldSpec& spec, const Point& x, std::span<const double> y) {
  return Realization(spec, y).displacement(x);
}

inline Matrix2 jacobian(const FieldSpec& spec, const Point& x, std::span<const double> y) {
  return Realization(spec, y).jacobian(x);
}

/// A = (J^T J)^{-1} det J for one Jacobian value.
inline Matrix2 transport_coefficient(const Matrix2& jac) {
  const Matrix2 b = jac.transpose() * jac;
  return b.inverse() * jac.determinant();
}

using ScalarField = std::function<double(const Point&)>;
using MatrixField = std::function<Matrix2(const Point&)>;

/// Coefficients of the problem pulled back to the reference square.
struct TransportData {
  MatrixField a_matrix;
  ScalarField det_j;
  ScalarField f_ref;
};

inline constexpr int kDefaultVerificationGrid = 33;

/// Builds A(x,y) and f_ref(x,y) = f(V(x,y)) det J(x,y). Admissibility
/// (det J > 0) is checked on a grid x grid tensor grid of the square.
inline TransportData transport_data(const FieldSpec& spec, std::span<const double> y, ScalarField f,
                                    int grid = kDefaultVerificationGrid) {
  auto real = std::make_shared<const Realization>(spec, y);
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const Point x{static_cast<double>(a) / (grid - 1), static_cast<double>(b) / (grid - 1)};
      const double det = real->jacobian(x).determinant();
      if (!(det > 0.0)) {
        throw Error(ErrorKind::NonPositiveJacobian, "det J = " + std::to_string(det) + " at x = (" +
                                                        std::to_string(x[0]) + ", " + std::to_string(x[1]) +
                                                        ")");
      }
    }
  }
  TransportData out;
  out.a_matrix = [real](const Point& x) { return transport_coefficient(real->jacobian(x)); };
  out.det_j = [real](const Point& x) { return real->jacobian(x).determinant(); };
  out.f_ref = [real, f = std::move(f)](const Point& x) {
    return f(real->displacement(x)) * real->jacobian(x).determinant();
  };
  return out;
}

struct BSequence {
  std::vector<double> b;
  double xi_b = 0.0;  ///< sum of all b_j; +inf when the series diverges
};

/// b_j = 6^{-1/2} ||psi_j||_{W^{1,inf}}. For the cosine family this is
/// (c pi / sqrt 6) j^{1-theta} and xi_b = (c pi / sqrt 6) zeta(theta - 1),
/// which is finite only for theta > 2. For a custom family xi_b is the
/// partial sum over j <= s.
inline BSequence b_sequence(const FieldSpec& spec) {
  if (!(spec.theta > 1.0)) throw Error(ErrorKind::ThetaTooSmall, "theta must exceed 1");
  spec.validate();
  BSequence out;
  out.b.resize(spec.s);
  if (spec.family == Family::Custom) {
    CompensatedSum acc;
    for (std::size_t j = 1; j <= spec.s; ++j) {
      out.b[j - 1] = spec.custom->b(j);
      acc.add(out.b[j - 1]);
    }
    out.xi_b = acc.value();
    return out;
  }
  const double lead = spec.amplitude * std::numbers::pi / std::sqrt(6.0);
  for (std::size_t j = 1; j <= spec.s; ++j) out.b[j - 1] = lead * std::pow(static_cast<double>(j), 1.0 - spec.theta);
  out.xi_b = spec.theta > 2.0 ? lead * riemann_zeta(spec.theta - 1.0) : std::numeric_limits<double>::infinity();
  return out;
}

/// Extreme singular values of a 2x2 matrix, {min, max}.
inline std::pair<double, double> singular_values(const Matrix2& m) {
  const double fro2 = m.squaredNorm();
  const double det = m.determinant();
  const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
  const double smax = std::sqrt(0.5 * (fro2 + disc));
  const double smin = smax > 0.0 ? std::abs(det) / smax : 0.0;
  return {smin, smax};
}

struct SigmaBounds {
  double sigma_min = 1.0;
  double sigma_max = 1.0;
  bool near_degenerate = false;  ///< sigma_min < 0.1
};

/// Deterministic parameter samples: y_i = frac(i z / N), i = 0..N-1, with
/// a Korobov-type vector z_j = a^{j-1} mod N. Sample 0 is the origin.
inline std::vector<std::vector<double>> diagnostic_samples(std::size_t s, std::size_t count) {
  std::vector<std::vector<double>> ys;
  if (count == 0) return ys;
  const auto n = static_cast<std::uint64_t>(count);
  std::uint64_t a = static_cast<std::uint64_t>(std::llround(0.6180339887498949 * static_cast<double>(n)));
  if (a == 0) a = 1;
  std::vector<std::uint64_t> z(s);
  std::uint64_t power = 1 % n;
  for (std::size_t j = 0; j < s; ++j) {
    z[j] = power == 0 ? 1 : power;
    power = (power * a) % n;
  }
  ys.reserve(count);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<double> y(s);
    for (std::size_t j = 0; j < s; ++j) y[j] = static_cast<double>((i * z[j]) % n) / static_cast<double>(n);
    ys.push_back(std::move(y));
  }
  return ys;
}

/// Estimates the singular-value bounds of J(x,y) over a tensor grid in x
/// and `sample_count` deterministic parameter samples.
inline SigmaBounds sigma_bounds(const FieldSpec& spec, int grid_resolution, std::size_t sample_count) {
  spec.validate();
  if (grid_resolution < 2) throw Error(ErrorKind::InvalidArgument, "grid resolution must be >= 2");
  SigmaBounds out{std::numeric_limits<double>::infinity(), 0.0, false};
  for (const auto& y : diagnostic_samples(spec.s, sample_count)) {
    const Realization real(spec, y);
    for (int a = 0; a < grid_resolution; ++a) {
      for (int b = 0; b < grid_resolution; ++b) {
        const Point x{static_cast<double>(a) / (grid_resolution - 1), static_cast<double>(b) / (grid_resolution - 1)};
        const auto [lo, hi] = singular_values(real.jacobian(x));
        out.sigma_min = std::min(out.sigma_min, lo);
        out.sigma_max = std::max(out.sigma_max, hi);
      }
    }
  }
  if (sample_count == 0) out = SigmaBounds{};
  out.near_degenerate = out.sigma_min < 0.1;
  return out;
}

/// Smallest det J over the verification grid and parameter samples.
inline double min_det_jacobian(const FieldSpec& spec, int grid_resolution, std::size_t sample_count) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& y : diagnostic_samples(spec.s, sample_count)) {
    const Realization real(spec, y);
    for (int a = 0; a < grid_resolution; ++a) {
      for (int b = 0; b < grid_resolution; ++b) {
        const Point x{static_cast<double>(a) / (grid_resolution - 1), static_cast<double>(b) / (grid_resolution - 1)};
        worst = std::min(worst, real.jacobian(x).determinant());
      }
    }
  }
  return worst;
}

}  // namespace domainuq::field
