#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/format.hpp"
#include "domainuq/random_field.hpp"

namespace domainuq::fem {

using Point = Eigen::Vector2d;
using Matrix2 = Eigen::Matrix2d;
using Triangle = std::array<std::size_t, 3>;

/// Boundary membership as bit flags; corner vertices carry two flags.
enum BoundaryTag : std::uint8_t {
  kInterior = 0,
  kBottom = 1,
  kTop = 2,
  kLeft = 4,
  kRight = 8,
};

struct Mesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;  ///< counterclockwise
  std::vector<std::uint8_t> boundary_tags;
  double h = 0.0;
  int m = 0;  ///< cells per side of the structured grid

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  bool on_boundary(std::size_t v) const { return boundary_tags[v] != kInterior; }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

/// Unit-square mesh with m cells per side, each cell cut along the
/// (i,j)-(i+1,j+1) diagonal. Vertex (i,j) has index i + j (m+1).
inline Mesh structured_mesh(int m) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "structured mesh needs m >= 2");
  Mesh mesh;
  mesh.m = m;
  mesh.h = 1.0 / m;
  const std::size_t side = static_cast<std::size_t>(m) + 1;
  mesh.vertices.reserve(side * side);
  mesh.boundary_tags.reserve(side * side);
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      mesh.vertices.emplace_back(static_cast<double>(i) / m, static_cast<double>(j) / m);
      std::uint8_t tag = kInterior;
      if (j == 0) tag |= kBottom;
      if (j == m) tag |= kTop;
      if (i == 0) tag |= kLeft;
      if (i == m) tag |= kRight;
      mesh.boundary_tags.push_back(tag);
    }
  }
  mesh.triangles.reserve(2 * static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const std::size_t v00 = i + j * side;
      const std::size_t v10 = v00 + 1;
      const std::size_t v01 = v00 + side;
      const std::size_t v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

/// The base mesh with every vertex moved by a deformation.
struct MappedMesh {
  std::shared_ptr<const Mesh> base;
  std::vector<Point> mapped_vertices;
  std::vector<double> y;

  std::array<Point, 3> corners(std::size_t t) const {
    const auto& tri = base->triangles[t];
    return {mapped_vertices[tri[0]], mapped_vertices[tri[1]], mapped_vertices[tri[2]]};
  }
};

/// Worst (smallest) signed area over a set of vertex coordinates.
inline std::pair<std::size_t, double> min_signed_area(const Mesh& mesh, std::span<const Point> coords) {
  std::size_t worst = 0;
  double area = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double a = signed_area(coords[tri[0]], coords[tri[1]], coords[tri[2]]);
    if (a < area) {
      area = a;
      worst = t;
    }
  }
  return {worst, area};
}

/// Maps every vertex through `deformation` and rejects inverted or
/// collapsed triangles.
inline MappedMesh map_mesh(std::shared_ptr<const Mesh> mesh, const std::function<Point(const Point&)>& deformation,
                           std::vector<double> y = {}) {
  MappedMesh out;
  out.mapped_vertices.reserve(mesh->vertices.size());
  for (const auto& v : mesh->vertices) out.mapped_vertices.push_back(deformation(v));
  const auto [worst, area] = min_signed_area(*mesh, out.mapped_vertices);
  if (!(area > 0.0)) throw DegenerateElementError(worst, area);
  out.base = std::move(mesh);
  out.y = std::move(y);
  return out;
}

inline MappedMesh map_mesh(std::shared_ptr<const Mesh> mesh, const field::FieldSpec& spec, std::span<const double> y) {
  const field::Realization real(spec, y);
  return map_mesh(std::move(mesh), [&real](const Point& x) { return real.displacement(x); },
                  std::vector<double>(y.begin(), y.end()));
}

/// Constant Jacobian of the affine map taking reference triangle t onto its
/// mapped image.
inline Matrix2 element_jacobian(const Mesh& mesh, std::span<const Point> mapped, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  Matrix2 ref, img;
  ref.col(0) = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
  ref.col(1) = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
  img.col(0) = mapped[tri[1]] - mapped[tri[0]];
  img.col(1) = mapped[tri[2]] - mapped[tri[0]];
  return img * ref.inverse();
}

/// vertices CSV (index,x1,x2,tag) and triangles CSV (index,v0,v1,v2).
inline std::string vertices_csv(const Mesh& mesh, std::span<const Point> coords = {}) {
  std::ostringstream os;
  os << "index,x1,x2,tag\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point& p = coords.empty() ? mesh.vertices[v] : coords[v];
    os << v << ',' << format_double(p[0]) << ',' << format_double(p[1]) << ','
       << static_cast<int>(mesh.boundary_tags[v]) << '\n';
  }
  return os.str();
}

inline std::string triangles_csv(const Mesh& mesh) {
  std::ostringstream os;
  os << "index,v0,v1,v2\n";
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    os << t << ',' << tri[0] << ',' << tri[1] << ',' << tri[2] << '\n';
  }
  return os.str();
}

/// Nodal field on reference vertices: columns x1, x2, value.
inline std::string nodal_field_csv(const Mesh& mesh, std::span<const double> values) {
  if (values.size() != mesh.vertex_count()) throw Error(ErrorKind::MeshMismatch, "nodal vector length");
  std::ostringstream os;
  os << "x1,x2,value\n";
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    os << format_double(mesh.vertices[v][0]) << ',' << format_double(mesh.vertices[v][1]) << ','
       << format_double(values[v]) << '\n';
  }
  return os.str();
}

}  // namespace domainuq::fem
