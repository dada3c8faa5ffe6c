#pragma once

// P1 assembly on a structured mesh and the two boundary value problems:
// the Dirichlet source problem and the capacity pair.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/fem/mesh.hpp"
#include "domainuq/numerics.hpp"
#include "domainuq/random_field.hpp"

namespace domainuq::fem {

using SourceFunction = std::function<double(const Point&)>;

enum class LoadQuadrature {
  Centroid,      ///< one point, exact for affine f
  EdgeMidpoint,  ///< three edge midpoints, exact for affine f and for the total of quadratic f
};

struct SolverSettings {
  double tolerance = 1e-10;       ///< relative residual
  std::size_t max_iter_factor = 10;  ///< max iterations = factor * dof
  LoadQuadrature load = LoadQuadrature::Centroid;
};

enum class BcKind { Source, CapacityPrimal, CapacityConjugate };

struct FemSolution {
  std::vector<double> nodal_values;
  std::shared_ptr<const MappedMesh> mesh;
  BcKind bc_kind = BcKind::Source;
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Dirichlet data: vertex v is fixed to value[v] when fixed[v] != 0.
struct DirichletData {
  std::vector<char> fixed;
  std::vector<double> value;
};

inline DirichletData dirichlet_from_tags(const Mesh& mesh, std::uint8_t zero_tags, std::uint8_t one_tags) {
  DirichletData bc{std::vector<char>(mesh.vertex_count(), 0), std::vector<double>(mesh.vertex_count(), 0.0)};
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto tag = mesh.boundary_tags[v];
    if (tag & one_tags) {
      bc.fixed[v] = 1;
      bc.value[v] = 1.0;
    } else if (tag & zero_tags) {
      bc.fixed[v] = 1;
    }
  }
  return bc;
}

/// Barycentric gradients of the triangle (p0, p1, p2); `area` is signed.
inline std::array<Point, 3> barycentric_gradients(const std::array<Point, 3>& p, double area) {
  std::array<Point, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    g[i] = Point(a[1] - b[1], b[0] - a[0]) / (2.0 * area);
  }
  return g;
}

/// Local load vector: integral of f phi_a over the triangle.
using ElementLoad = std::function<std::array<double, 3>(std::size_t, const std::array<Point, 3>&, double)>;

inline ElementLoad quadrature_load(SourceFunction f, LoadQuadrature rule) {
  if (!f) return {};
  return [f = std::move(f), rule](std::size_t, const std::array<Point, 3>& p, double area) {
    if (rule == LoadQuadrature::Centroid) {
      const double v = f((p[0] + p[1] + p[2]) / 3.0) * area / 3.0;
      return std::array<double, 3>{v, v, v};
    }
    // midpoint of edge opposite vertex i; phi_a = 1/2 on the two adjacent edges
    std::array<double, 3> fm;
    for (int i = 0; i < 3; ++i) fm[i] = f(0.5 * (p[(i + 1) % 3] + p[(i + 2) % 3]));
    std::array<double, 3> out;
    for (int a = 0; a < 3; ++a) out[a] = area / 3.0 * 0.5 * (fm[(a + 1) % 3] + fm[(a + 2) % 3]);
    return out;
  };
}

struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<std::ptrdiff_t> dof_of_vertex;  ///< -1 for Dirichlet vertices
  std::vector<std::size_t> vertex_of_dof;
};

/// Assembles K_ab = |T| grad phi_a . (A_T grad phi_b) on the triangles of
/// `mesh` placed at `coords`. `coefficients` holds one matrix A_T per
/// triangle, or is empty for A = I. Dirichlet values are eliminated.
inline LinearSystem assemble_system(const Mesh& mesh, std::span<const Point> coords,
                                    std::span<const Matrix2> coefficients, const ElementLoad& load,
                                    const DirichletData& bc) {
  const std::size_t nv = mesh.vertex_count();
  if (coords.size() != nv) throw Error(ErrorKind::MeshMismatch, "coordinate count differs from vertex count");
  if (!coefficients.empty() && coefficients.size() != mesh.triangles.size()) {
    throw Error(ErrorKind::MeshMismatch, "one coefficient matrix per triangle expected");
  }
  LinearSystem sys;
  sys.dof_of_vertex.assign(nv, -1);
  for (std::size_t v = 0; v < nv; ++v) {
    if (!bc.fixed[v]) {
      sys.dof_of_vertex[v] = static_cast<std::ptrdiff_t>(sys.vertex_of_dof.size());
      sys.vertex_of_dof.push_back(v);
    }
  }
  const auto ndof = static_cast<Eigen::Index>(sys.vertex_of_dof.size());
  sys.rhs = Eigen::VectorXd::Zero(ndof);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.triangles.size() * 9);

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const std::array<Point, 3> p{coords[tri[0]], coords[tri[1]], coords[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    if (!(area > 0.0)) throw DegenerateElementError(t, area);
    const auto grad = barycentric_gradients(p, area);
    std::array<double, 3> local_load{0.0, 0.0, 0.0};
    if (load) local_load = load(t, p, area);
    for (int a = 0; a < 3; ++a) {
      const auto row = sys.dof_of_vertex[tri[a]];
      if (row < 0) continue;
      sys.rhs[row] += local_load[a];
      const Point ag = coefficients.empty() ? grad[a] : Point(coefficients[t].transpose() * grad[a]);
      for (int b = 0; b < 3; ++b) {
        const double k = area * ag.dot(grad[b]);
        const auto col = sys.dof_of_vertex[tri[b]];
        if (col < 0) {
          sys.rhs[row] -= k * bc.value[tri[b]];
        } else {
          triplets.emplace_back(row, col, k);
        }
      }
    }
  }
  sys.matrix.resize(ndof, ndof);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

struct SolveStats {
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients; fills in the Dirichlet values.
inline std::vector<double> solve_system(const LinearSystem& sys, const DirichletData& bc,
                                        const SolverSettings& settings, SolveStats* stats = nullptr) {
  std::vector<double> u = bc.value;
  if (sys.vertex_of_dof.empty()) return u;
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(settings.tolerance);
  cg.setMaxIterations(static_cast<Eigen::Index>(settings.max_iter_factor * sys.vertex_of_dof.size()));
  cg.compute(sys.matrix);
  if (cg.info() != Eigen::Success) throw Error(ErrorKind::SolverDivergence, "preconditioner setup failed");
  const Eigen::VectorXd x = cg.solve(sys.rhs);
  if (cg.info() != Eigen::Success || !x.allFinite()) {
    throw Error(ErrorKind::SolverDivergence, "CG stopped after " + std::to_string(cg.iterations()) +
                                                 " iterations, relative residual " + std::to_string(cg.error()));
  }
  for (std::size_t d = 0; d < sys.vertex_of_dof.size(); ++d) u[sys.vertex_of_dof[d]] = x[static_cast<Eigen::Index>(d)];
  if (stats) *stats = {static_cast<std::size_t>(cg.iterations()), cg.error()};
  return u;
}

inline FemSolution solve_on(std::shared_ptr<const MappedMesh> mapped, const ElementLoad& load,
                            const DirichletData& bc, BcKind kind, const SolverSettings& settings) {
  const auto sys = assemble_system(*mapped->base, mapped->mapped_vertices, {}, load, bc);
  SolveStats stats;
  FemSolution sol;
  sol.nodal_values = solve_system(sys, bc, settings, &stats);
  sol.mesh = std::move(mapped);
  sol.bc_kind = kind;
  sol.iterations = stats.iterations;
  sol.residual = stats.residual;
  return sol;
}

/// -Laplace u = f on the mapped domain, u = 0 on its boundary.
inline FemSolution solve_source(const MappedMesh& mesh, const SourceFunction& f, const SolverSettings& settings = {}) {
  auto mapped = std::make_shared<const MappedMesh>(mesh);
  const auto bc = dirichlet_from_tags(*mapped->base, kBottom | kTop | kLeft | kRight, 0);
  return solve_on(std::move(mapped), quadrature_load(f, settings.load), bc, BcKind::Source, settings);
}

/// Primal: u = 0 on the bottom, 1 on the top, natural on the sides.
/// Conjugate: v = 0 on the left, 1 on the right, natural on top and bottom.
inline std::pair<FemSolution, FemSolution> solve_capacity_pair(const MappedMesh& mesh,
                                                               const SolverSettings& settings = {}) {
  auto mapped = std::make_shared<const MappedMesh>(mesh);
  const auto bc_u = dirichlet_from_tags(*mapped->base, kBottom, kTop);
  const auto bc_v = dirichlet_from_tags(*mapped->base, kLeft, kRight);
  auto u = solve_on(mapped, {}, bc_u, BcKind::CapacityPrimal, settings);
  auto v = solve_on(mapped, {}, bc_v, BcKind::CapacityConjugate, settings);
  return {std::move(u), std::move(v)};
}

/// How the reference-domain solve obtains the Jacobian on each triangle.
enum class JacobianModel {
  ElementAffine,  ///< affine interpolant of the mapping on the triangle
  Analytic,       ///< exact J(x, y) at the triangle centroid
};

/// Solves the pulled-back problem -div(A grad u) = f_ref on the reference
/// square with homogeneous Dirichlet data. Nodal values are returned on the
/// reference vertices, which correspond one-to-one to the mapped ones.
inline FemSolution solve_source_reference(const MappedMesh& mesh, const field::FieldSpec& spec,
                                          const SourceFunction& f, JacobianModel model,
                                          const SolverSettings& settings = {}) {
  auto mapped = std::make_shared<const MappedMesh>(mesh);
  const Mesh& base = *mapped->base;
  const std::size_t nt = base.triangles.size();
  std::vector<Matrix2> coeff(nt);
  std::vector<double> det(nt);
  std::unique_ptr<field::Realization> real;
  if (model == JacobianModel::Analytic) real = std::make_unique<field::Realization>(spec, mapped->y);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = base.triangles[t];
    Matrix2 jac;
    if (model == JacobianModel::ElementAffine) {
      jac = element_jacobian(base, mapped->mapped_vertices, t);
    } else {
      jac = real->jacobian((base.vertices[tri[0]] + base.vertices[tri[1]] + base.vertices[tri[2]]) / 3.0);
    }
    det[t] = jac.determinant();
    if (!(det[t] > 0.0)) throw Error(ErrorKind::NonPositiveJacobian, "det J <= 0 on triangle " + std::to_string(t));
    coeff[t] = field::transport_coefficient(jac);
  }
  ElementLoad load;
  if (f && model == JacobianModel::ElementAffine) {
    // f_ref = f(V_T) det J_T with V_T the affine map onto the mapped triangle
    auto mapped_rule = quadrature_load(f, settings.load);
    load = [mapped_rule, mp = mapped.get(), &det](std::size_t t, const std::array<Point, 3>&, double area) {
      auto out = mapped_rule(t, mp->corners(t), area);
      for (auto& v : out) v *= det[t];
      return out;
    };
  } else if (f) {
    const field::Realization* rp = real.get();
    load = quadrature_load([rp, &f](const Point& x) { return f(rp->displacement(x)) * rp->jacobian(x).determinant(); },
                           settings.load);
  }
  const auto bc = dirichlet_from_tags(base, kBottom | kTop | kLeft | kRight, 0);
  const auto sys = assemble_system(base, base.vertices, coeff, load, bc);
  SolveStats stats;
  FemSolution sol;
  sol.nodal_values = solve_system(sys, bc, settings, &stats);
  sol.mesh = std::move(mapped);
  sol.bc_kind = BcKind::Source;
  sol.iterations = stats.iterations;
  sol.residual = stats.residual;
  return sol;
}

/// Dirichlet energy sum_T |grad u|^2 |T| of a nodal vector on given coordinates.
inline double dirichlet_energy(const Mesh& mesh, std::span<const Point> coords, std::span<const double> u) {
  CompensatedSum acc;
  for (const auto& tri : mesh.triangles) {
    const std::array<Point, 3> p{coords[tri[0]], coords[tri[1]], coords[tri[2]]};
    const double area = signed_area(p[0], p[1], p[2]);
    const auto g = barycentric_gradients(p, area);
    const Point grad = u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    acc.add(grad.squaredNorm() * area);
  }
  return acc.value();
}

/// Capacity of a capacity-pair solution on its mapped mesh.
inline double capacity(const FemSolution& sol) {
  if (sol.bc_kind == BcKind::Source) throw Error(ErrorKind::InvalidArgument, "capacity needs a capacity solution");
  return dirichlet_energy(*sol.mesh->base, sol.mesh->mapped_vertices, sol.nodal_values);
}

/// |1 - cap * cap_conj| for one realization.
inline double reciprocity_error(const MappedMesh& mesh, const SolverSettings& settings = {}) {
  const auto [u, v] = solve_capacity_pair(mesh, settings);
  return std::abs(1.0 - capacity(u) * capacity(v));
}

}  // namespace domainuq::fem
