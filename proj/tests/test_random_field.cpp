#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "domainuq/numerics.hpp"
#include "domainuq/random_field.hpp"

using namespace domainuq;
using namespace domainuq::field;

namespace {

const double kSqrt6 = std::sqrt(6.0);

FieldSpec spec_of(double theta, double c, std::size_t s) {
  FieldSpec spec;
  spec.theta = theta;
  spec.amplitude = c;
  spec.s = s;
  return spec;
}

std::vector<double> uniform_y(std::mt19937_64& rng, std::size_t s) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> y(s);
  for (auto& v : y) v = u(rng);
  return y;
}

}  // namespace

TEST_CASE("y = 0 gives the identity map") {
  const auto spec = spec_of(2.5, 1.0, 6);
  const std::vector<double> y(6, 0.0);
  const Realization real(spec, y);
  for (const Point& x : {Point{0.3, 0.7}, Point{1.0, 1.0}, Point{0.0, 0.5}}) {
    CHECK((real.displacement(x) - x).norm() == 0.0);
    CHECK((real.jacobian(x) - Matrix2::Identity()).norm() == 0.0);
  }
}

TEST_CASE("single mode at y = 1/4 lifts the corner (0,1) by c / sqrt 6") {
  const double c = 0.8;
  const auto spec = spec_of(2.0, c, 1);
  const std::vector<double> y{0.25};
  const Point v = displacement(spec, Point{0.0, 1.0}, y);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == Catch::Approx(1.0 + c / kSqrt6).epsilon(1e-15));
}

TEST_CASE("the bottom edge stays fixed and the top edge follows the profile") {
  std::mt19937_64 rng(11);
  const auto spec = spec_of(2.1, std::sqrt(1.5), 10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto y = uniform_y(rng, spec.s);
    const Realization real(spec, y);
    for (double x1 : {0.0, 0.13, 0.5, 0.91, 1.0}) {
      CHECK((real.displacement(Point{x1, 0.0}) - Point{x1, 0.0}).norm() == 0.0);
      const Point top = real.displacement(Point{x1, 1.0});
      CHECK(top[0] == x1);
      CHECK(top[1] == Catch::Approx(real.top_height(x1)).epsilon(1e-14));
      // direct sum of the series
      double h = 1.0;
      for (std::size_t j = 1; j <= spec.s; ++j) {
        h += std::sin(2.0 * std::numbers::pi * y[j - 1]) / kSqrt6 * spec.amplitude *
             std::pow(static_cast<double>(j), -spec.theta) * std::cos(j * std::numbers::pi * x1);
      }
      CHECK(top[1] == Catch::Approx(h).epsilon(1e-13));
    }
  }
}

TEST_CASE("Jacobian matches central finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto spec = spec_of(2.1, std::sqrt(1.5), 12);
  const double eps = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const auto y = uniform_y(rng, spec.s);
    const Point x{u(rng), u(rng)};
    const Matrix2 jac = jacobian(spec, x, y);
    Matrix2 fd;
    for (int k = 0; k < 2; ++k) {
      Point dx = Point::Zero();
      dx[k] = eps;
      fd.col(k) = (displacement(spec, x + dx, y) - displacement(spec, x - dx, y)) / (2.0 * eps);
    }
    CHECK((jac - fd).norm() <= 1e-5 * jac.norm());
  }
}

TEST_CASE("fluctuation derivative attains j pi c j^{-theta} at (1/(2j), 1)") {
  const auto spec = spec_of(2.5, 1.3, 8);
  for (std::size_t j = 1; j <= 8; ++j) {
    const Matrix2 d = fluctuation_jacobian(spec, j, Point{1.0 / (2.0 * j), 1.0});
    const double expected = spec.amplitude * std::pow(static_cast<double>(j), 1.0 - spec.theta) * std::numbers::pi;
    CHECK(std::abs(d(1, 0)) == Catch::Approx(expected).epsilon(1e-13));
    CHECK(b_sequence(spec).b[j - 1] == Catch::Approx(expected / kSqrt6).epsilon(1e-13));
  }
}

TEST_CASE("transport coefficient is symmetric positive definite with unit determinant") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto spec = spec_of(2.1, std::sqrt(1.5), 10);
  for (int trial = 0; trial < 50; ++trial) {
    const auto y = uniform_y(rng, spec.s);
    const Point x{u(rng), u(rng)};
    const Matrix2 jac = jacobian(spec, x, y);
    const Matrix2 a = transport_coefficient(jac);
    CHECK(std::abs(a(0, 1) - a(1, 0)) <= 1e-14 * a.norm());
    Eigen::SelfAdjointEigenSolver<Matrix2> eig(a);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    // A = det J (J^T J)^{-1}: in two dimensions det A = 1
    CHECK(a.determinant() == Catch::Approx(1.0).epsilon(1e-12));
    // B = J^T J / det J satisfies A B = I
    const Matrix2 b = jac.transpose() * jac / jac.determinant();
    CHECK((a * b - Matrix2::Identity()).norm() <= 1e-12);
  }
}

TEST_CASE("transport data pulls the source back with det J") {
  const auto spec = spec_of(2.5, 1.0, 4);
  const std::vector<double> y{0.1, 0.4, 0.7, 0.2};
  const auto data = transport_data(spec, y, [](const Point& p) { return p[0] + 2.0 * p[1]; });
  const Realization real(spec, y);
  const Point x{0.3, 0.6};
  const Point v = real.displacement(x);
  const double det = real.jacobian(x).determinant();
  CHECK(data.f_ref(x) == Catch::Approx((v[0] + 2.0 * v[1]) * det).epsilon(1e-14));
  CHECK(data.det_j(x) == Catch::Approx(det).epsilon(1e-14));
}

TEST_CASE("transport data rejects a folded map") {
  const auto spec = spec_of(2.0, 8.0, 1);
  const std::vector<double> y{0.75};
  try {
    transport_data(spec, y, [](const Point&) { return 1.0; });
    FAIL("expected NonPositiveJacobian");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveJacobian);
  }
}

TEST_CASE("b sequence examples") {
  const auto unit = b_sequence(spec_of(2.0, kSqrt6 / std::numbers::pi, 5));
  CHECK(unit.b[0] == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(unit.b[1] == Catch::Approx(0.5).epsilon(1e-15));
  CHECK(std::isinf(unit.xi_b));

  const auto b = b_sequence(spec_of(2.1, std::sqrt(1.5), 5));
  CHECK(b.b[0] == Catch::Approx(std::numbers::pi / 2.0).epsilon(1e-15));
  CHECK(b.xi_b == Catch::Approx(std::numbers::pi / 2.0 * std::riemann_zeta(1.1)).epsilon(1e-12));
}

TEST_CASE("xi_b matches zeta(theta - 1) and is finite only for theta > 2") {
  for (double theta : {2.05, 2.5, 3.0, 4.0}) {
    const auto b = b_sequence(spec_of(theta, 1.0, 3));
    CHECK(b.xi_b == Catch::Approx(std::numbers::pi / kSqrt6 * riemann_zeta(theta - 1.0)).epsilon(1e-13));
    CHECK(b.xi_b >= b.b[0] + b.b[1] + b.b[2]);
  }
  CHECK(std::isinf(b_sequence(spec_of(1.5, 1.0, 3)).xi_b));
  try {
    b_sequence(spec_of(1.0, 1.0, 3));
    FAIL("expected ThetaTooSmall");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ThetaTooSmall);
  }
}

TEST_CASE("singular values of a 2x2 matrix") {
  Matrix2 m;
  m << 3.0, 1.0, -2.0, 0.5;
  Eigen::JacobiSVD<Matrix2> svd(m);
  const auto [lo, hi] = singular_values(m);
  CHECK(lo == Catch::Approx(svd.singularValues()[1]).epsilon(1e-13));
  CHECK(hi == Catch::Approx(svd.singularValues()[0]).epsilon(1e-13));
}

TEST_CASE("sigma bounds") {
  // one sample is y = 0, where J = I
  const auto one = sigma_bounds(spec_of(2.1, std::sqrt(1.5), 10), 17, 1);
  CHECK(one.sigma_min == 1.0);
  CHECK(one.sigma_max == 1.0);

  const auto spec = spec_of(2.5, 1.0, 20);
  const auto bounds = sigma_bounds(spec, 17, 32);
  CHECK(bounds.sigma_min <= 1.0);
  CHECK(bounds.sigma_max >= 1.0);
  CHECK(bounds.sigma_max <= 1.0 + b_sequence(spec).xi_b);

  const auto tiny = sigma_bounds(spec_of(2.5, 1e-9, 20), 9, 16);
  CHECK(tiny.sigma_min == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(tiny.sigma_max == Catch::Approx(1.0).epsilon(1e-8));

  const auto zero = sigma_bounds(spec_of(2.5, 0.0, 20), 9, 16);
  CHECK(zero.sigma_min == 1.0);
  CHECK(zero.sigma_max == 1.0);
  CHECK_FALSE(zero.near_degenerate);
}

TEST_CASE("diagnostic samples start at the origin and stay in the unit cube") {
  const auto ys = diagnostic_samples(5, 64);
  REQUIRE(ys.size() == 64);
  for (double v : ys[0]) CHECK(v == 0.0);
  for (const auto& y : ys) {
    for (double v : y) CHECK((v >= 0.0 && v < 1.0));
  }
}

TEST_CASE("field spec json round trip and validation") {
  const auto spec = spec_of(2.5, 0.75, 12);
  nlohmann::json j = spec;
  const auto back = j.get<FieldSpec>();
  CHECK(back.theta == spec.theta);
  CHECK(back.amplitude == spec.amplitude);
  CHECK(back.s == spec.s);

  nlohmann::json bad = j;
  bad["thetta"] = 2.0;
  CHECK_THROWS_AS(bad.get<FieldSpec>(), Error);

  CHECK_THROWS_AS(spec_of(2.5, -1.0, 3).validate(), Error);
  CHECK_THROWS_AS(spec_of(2.5, 1.0, 0).validate(), Error);
  CHECK_NOTHROW(spec_of(2.5, 0.0, 3).validate());
}

TEST_CASE("custom fluctuation family") {
  auto custom = std::make_shared<CustomFluctuations>();
  custom->psi = [](std::size_t j, const Point& x) { return Point{0.0, x[1] * x[0] / static_cast<double>(j * j)}; };
  custom->dpsi = [](std::size_t j, const Point& x) {
    Matrix2 d;
    d << 0.0, 0.0, x[1] / static_cast<double>(j * j), x[0] / static_cast<double>(j * j);
    return d;
  };
  custom->b = [](std::size_t j) { return 1.0 / static_cast<double>(j * j); };
  FieldSpec spec = spec_of(2.0, 1.0, 3);
  spec.family = Family::Custom;
  spec.custom = custom;
  const std::vector<double> y{0.25, 0.0, 0.0};
  CHECK(displacement(spec, Point{1.0, 1.0}, y)[1] == Catch::Approx(1.0 + 1.0 / kSqrt6).epsilon(1e-15));
  CHECK(b_sequence(spec).xi_b == Catch::Approx(1.0 + 0.25 + 1.0 / 9.0).epsilon(1e-15));
}
