#pragma once

// Norms of P1 functions, errors against analytic functions, transfer between
// nested structured meshes, and the quantities of interest.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/fem/mesh.hpp"
#include "domainuq/fem/solve.hpp"
#include "domainuq/numerics.hpp"

namespace domainuq::fem {

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double h1_semi = 0.0;
};

namespace detail {

/// Integral of max(u, 0) for the linear function with vertex values u.
inline double positive_part_integral(std::array<double, 3> u, double area) {
  int positive = 0;
  for (double v : u) positive += v > 0.0;
  if (positive == 0) return 0.0;
  if (positive == 3) return area * (u[0] + u[1] + u[2]) / 3.0;
  if (positive == 2) {
    // u+ = u + (-u)+
    const double mean = area * (u[0] + u[1] + u[2]) / 3.0;
    return mean + positive_part_integral({-u[0], -u[1], -u[2]}, area);
  }
  // exactly one positive vertex: the positive region is a similar corner triangle
  const int i = u[0] > 0.0 ? 0 : (u[1] > 0.0 ? 1 : 2);
  const double p = u[i];
  const double a = u[(i + 1) % 3];
  const double b = u[(i + 2) % 3];
  return area * p * p * p / (3.0 * (p - a) * (p - b));
}

}  // namespace detail

inline double abs_integral_p1(const std::array<double, 3>& u, double area) {
  return detail::positive_part_integral(u, area) + detail::positive_part_integral({-u[0], -u[1], -u[2]}, area);
}

inline double square_integral_p1(const std::array<double, 3>& u, double area) {
  const double diag = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
  const double off = u[0] * u[1] + u[0] * u[2] + u[1] * u[2];
  return area / 6.0 * (diag + off);
}

/// Exact L1, L2 and H1-seminorm of a P1 function. `coords` defaults to the
/// mesh's own vertices.
inline Norms norms(const Mesh& mesh, std::span<const double> u, std::span<const Point> coords = {}) {
  if (u.size() != mesh.vertex_count()) throw Error(ErrorKind::MeshMismatch, "nodal vector length");
  if (coords.empty()) coords = mesh.vertices;
  CompensatedSum l1, l2, h1;
  for (const auto& tri : mesh.triangles) {
    const std::array<Point, 3> p{coords[tri[0]], coords[tri[1]], coords[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    const std::array<double, 3> v{u[tri[0]], u[tri[1]], u[tri[2]]};
    l1.add(abs_integral_p1(v, area));
    l2.add(square_integral_p1(v, area));
    const auto g = barycentric_gradients(p, area);
    h1.add((v[0] * g[0] + v[1] * g[1] + v[2] * g[2]).squaredNorm() * area);
  }
  return {l1.value(), std::sqrt(std::max(0.0, l2.value())), std::sqrt(std::max(0.0, h1.value()))};
}

/// Norms of the pulled-back solution on the reference square.
inline Norms norms(const FemSolution& sol) { return norms(*sol.mesh->base, sol.nodal_values); }

/// Consistent P1 mass matrix.
inline Eigen::SparseMatrix<double> mass_matrix(const Mesh& mesh, std::span<const Point> coords = {}) {
  if (coords.empty()) coords = mesh.vertices;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const double area = signed_area(coords[tri[0]], coords[tri[1]], coords[tri[2]]);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(tri[a], tri[b], area / 12.0 * (a == b ? 2.0 : 1.0));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

/// Degree-5 seven-point rule on a triangle (Dunavant), barycentric points.
struct TriangleRule {
  std::array<std::array<double, 3>, 7> points;
  std::array<double, 7> weights;
};

inline const TriangleRule& dunavant5() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
    const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
    r.points = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                 {a1, b1, b1},
                 {b1, a1, b1},
                 {b1, b1, a1},
                 {a2, b2, b2},
                 {b2, a2, b2},
                 {b2, b2, a2}}};
    r.weights = {0.225, w1, w1, w1, w2, w2, w2};
    return r;
  }();
  return rule;
}

using ExactFunction = std::function<double(const Point&)>;
using ExactGradient = std::function<Point(const Point&)>;

struct ExactErrors {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

/// Errors of a P1 function against a smooth exact solution, integrated with
/// the degree-5 rule so that the interpolation superconvergence at the
/// nodes does not leak into the measured rates.
inline ExactErrors errors_vs_exact(const Mesh& mesh, std::span<const double> u, const ExactFunction& exact,
                                   const ExactGradient& grad_exact, std::span<const Point> coords = {}) {
  if (u.size() != mesh.vertex_count()) throw Error(ErrorKind::MeshMismatch, "nodal vector length");
  if (coords.empty()) coords = mesh.vertices;
  const auto& rule = dunavant5();
  CompensatedSum l2, h1;
  for (const auto& tri : mesh.triangles) {
    const std::array<Point, 3> p{coords[tri[0]], coords[tri[1]], coords[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    const std::array<double, 3> v{u[tri[0]], u[tri[1]], u[tri[2]]};
    const auto g = barycentric_gradients(p, area);
    const Point grad_h = v[0] * g[0] + v[1] * g[1] + v[2] * g[2];
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const auto& lam = rule.points[q];
      const Point x = lam[0] * p[0] + lam[1] * p[1] + lam[2] * p[2];
      const double uh = lam[0] * v[0] + lam[1] * v[1] + lam[2] * v[2];
      const double e = exact(x) - uh;
      l2.add(rule.weights[q] * area * e * e);
      if (grad_exact) h1.add(rule.weights[q] * area * (grad_exact(x) - grad_h).squaredNorm());
    }
  }
  return {std::sqrt(std::max(0.0, l2.value())), std::sqrt(std::max(0.0, h1.value()))};
}

/// Value at x of a P1 function on a structured unit-square mesh.
inline double evaluate_structured(const Mesh& mesh, std::span<const double> u, const Point& x) {
  const int m = mesh.m;
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  const double sx = x[0] * m;
  const double sy = x[1] * m;
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, m - 1);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, m - 1);
  const double fx = sx - i;
  const double fy = sy - j;
  const std::size_t v00 = i + j * side;
  const double u00 = u[v00], u10 = u[v00 + 1], u01 = u[v00 + side], u11 = u[v00 + side + 1];
  // lower triangle (v00, v10, v11) when fx >= fy, upper (v00, v11, v01) otherwise
  if (fx >= fy) return u00 + fx * (u10 - u00) + fy * (u11 - u10);
  return u00 + fy * (u01 - u00) + fx * (u11 - u01);
}

/// Interpolates a coarse P1 function onto the vertices of a nested finer
/// structured mesh; exact since the coarse space is contained in the fine one.
inline std::vector<double> prolongate(const Mesh& coarse, std::span<const double> u, const Mesh& fine) {
  if (coarse.m <= 0 || fine.m <= 0 || fine.m % coarse.m != 0) {
    throw Error(ErrorKind::MeshMismatch, "meshes are not nested structured meshes");
  }
  if (u.size() != coarse.vertex_count()) throw Error(ErrorKind::MeshMismatch, "nodal vector length");
  std::vector<double> out(fine.vertex_count());
  for (std::size_t v = 0; v < fine.vertex_count(); ++v) out[v] = evaluate_structured(coarse, u, fine.vertices[v]);
  return out;
}

/// Equal-weight average of nodal vectors, summed in list order with
/// compensation.
inline std::vector<double> qoi_mean_field(std::span<const FemSolution> solutions, const Mesh& base) {
  CompensatedVectorSum acc(base.vertex_count());
  for (const auto& sol : solutions) {
    if (sol.nodal_values.size() != base.vertex_count() || (sol.mesh && sol.mesh->base->m != base.m)) {
      throw Error(ErrorKind::MeshMismatch, "solution does not live on the base mesh");
    }
    acc.add(sol.nodal_values);
  }
  if (solutions.empty()) return std::vector<double>(base.vertex_count(), 0.0);
  return acc.values(1.0 / static_cast<double>(solutions.size()));
}

enum class GradientDomain {
  Mapped,     ///< ||grad u_h|| over the mapped triangles
  Reference,  ///< ||grad u_h o V_h|| over the reference triangles
};

inline double qoi_grad_norm(const FemSolution& sol, GradientDomain domain = GradientDomain::Mapped) {
  const Mesh& base = *sol.mesh->base;
  const std::span<const Point> coords =
      domain == GradientDomain::Mapped ? std::span<const Point>(sol.mesh->mapped_vertices) : base.vertices;
  return std::sqrt(std::max(0.0, dirichlet_energy(base, coords, sol.nodal_values)));
}

}  // namespace domainuq::fem
