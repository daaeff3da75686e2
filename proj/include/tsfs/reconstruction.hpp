#pragma once

// Realizing one member of a solution family in the world: a rotation Q maps
// the canonical frame (N0, l_t, b) to world axes, after which the Taylor
// normal field can be sampled, rendered, integrated to heights and meshed.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/grid.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

/// Q in SO(3): columns are the world images of the canonical axes.
struct ScenePose {
  Mat3 rotation = Mat3::Identity();

  Vec3 world_normal() const { return rotation.col(0); }
  Vec3 world_light(double i0) const { return rotation * Vec3(i0, std::sqrt(std::max(0.0, 1.0 - i0 * i0)), 0.0); }
  /// Rows (N0, l_t, b): maps world vectors into the canonical frame.
  Mat3 projection() const { return rotation.transpose(); }

  void validate() const {
    if (!is_orthonormal(rotation)) throw ValidationError("pose rotation is not orthonormal");
    if (std::abs(rotation.determinant() - 1.0) > 1e-10) throw ValidationError("pose rotation has det != +1");
  }
};

/// The world normal sits at (slant, tilt) in spherical coordinates about +z;
/// `spin` turns the light about that normal. At zero angles the normal is +z
/// and l_t points along +x.
inline ScenePose pose_from_angles(double slant, double tilt, double spin) {
  Mat3 base;
  base.col(0) = Vec3::UnitZ();
  base.col(1) = Vec3::UnitX();
  base.col(2) = Vec3::UnitY();
  const Mat3 r = Eigen::AngleAxisd(tilt, Vec3::UnitZ()).toRotationMatrix() *
                 Eigen::AngleAxisd(slant, Vec3::UnitY()).toRotationMatrix() * base *
                 Eigen::AngleAxisd(spin, Vec3::UnitX()).toRotationMatrix();
  return ScenePose{r};
}

/// The frame of a known scene: columns N0, l_t = unit tangential part of L,
/// and b = N0 x l_t.
inline ScenePose pose_from_scene(const Vec3& n0, const Vec3& light) {
  if (std::abs(n0.norm() - 1.0) > 1e-10 || std::abs(light.norm() - 1.0) > 1e-10)
    throw ValidationError("pose_from_scene: N0 and L must be unit vectors");
  const double i = n0.dot(light);
  if (std::abs(i) >= 1.0 - kDegenerateTau) throw DegeneracyError("pose_from_scene: light parallel to normal");
  const Vec3 lt = (light - i * n0) / std::sqrt(1.0 - i * i);
  ScenePose pose;
  pose.rotation.col(0) = n0;
  pose.rotation.col(1) = lt.normalized();
  pose.rotation.col(2) = n0.cross(pose.rotation.col(1));
  return pose;
}

struct NormalGrid {
  VectorGrid field;
  bool renormalized = false;
  bool visible = true;  // every sample has z > 0
};

inline NormalGrid world_normal_field(const CanonicalSolution& sol, const ScenePose& pose, const GridSpec& spec,
                                     bool renormalize = true) {
  pose.validate();
  NormalGrid out;
  out.field = spec.make<Vec3>();
  out.renormalized = renormalize;
  for (int r = 0; r < out.field.ny; ++r) {
    for (int c = 0; c < out.field.nx; ++c) {
      const auto p = out.field.position(c, r);
      Vec3 n = pose.rotation * eval_normal_taylor(sol, p.x(), p.y());
      if (renormalize) n.normalize();
      if (!(n.z() > 0.0)) out.visible = false;
      out.field.at(c, r) = n;
    }
  }
  return out;
}

/// I = L . N per sample; negative values (attached shadow) are kept.
inline ScalarGrid render_lambertian(const NormalGrid& normals, const Vec3& light) {
  if (std::abs(light.norm() - 1.0) > 1e-10) throw ValidationError("render: light must be unit length");
  ScalarGrid img(normals.field.nx, normals.field.ny, normals.field.spacing);
  for (std::size_t i = 0; i < img.size(); ++i) img.values[i] = light.dot(normals.field.values[i]);
  return img;
}

inline std::size_t shadow_count(const ScalarGrid& img) {
  std::size_t n = 0;
  for (double v : img.values)
    if (v < 0.0) ++n;
  return n;
}

struct IntegrationResult {
  ScalarGrid heights;
  /// RMS of the discrete curl of (f_x, f_y); zero for integrable fields up to
  /// fourth-order truncation.
  double curl_residual = 0.0;
  /// RMS mismatch between height differences and the edge-averaged gradients.
  double gradient_residual = 0.0;
};

namespace detail {

inline double discrete_curl_rms(const ScalarGrid& p, const ScalarGrid& q) {
  const double h = p.spacing;
  double sq = 0.0;
  int count = 0;
  if (p.nx >= 5 && p.ny >= 5) {
    auto d4 = [h](double m2, double m1, double p1, double p2) { return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h); };
    for (int r = 2; r < p.ny - 2; ++r)
      for (int c = 2; c < p.nx - 2; ++c) {
        const double py = d4(p.at(c, r - 2), p.at(c, r - 1), p.at(c, r + 1), p.at(c, r + 2));
        const double qx = d4(q.at(c - 2, r), q.at(c - 1, r), q.at(c + 1, r), q.at(c + 2, r));
        sq += (py - qx) * (py - qx);
        ++count;
      }
  } else if (p.nx >= 3 && p.ny >= 3) {
    for (int r = 1; r < p.ny - 1; ++r)
      for (int c = 1; c < p.nx - 1; ++c) {
        const double py = (p.at(c, r + 1) - p.at(c, r - 1)) / (2.0 * h);
        const double qx = (q.at(c + 1, r) - q.at(c - 1, r)) / (2.0 * h);
        sq += (py - qx) * (py - qx);
        ++count;
      }
  }
  return count > 0 ? std::sqrt(sq / count) : 0.0;
}

}  // namespace detail

/// Least-squares heights from f_x = -N_x/N_z, f_y = -N_y/N_z: forward
/// differences matched to edge-averaged gradients, whose normal equations are
/// the Neumann Poisson problem. The result is shifted so the (interpolated)
/// center height is 0.
inline IntegrationResult integrate_heights(const NormalGrid& normals) {
  const VectorGrid& n = normals.field;
  ScalarGrid p(n.nx, n.ny, n.spacing), q(n.nx, n.ny, n.spacing);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const Vec3& v = n.values[i];
    if (!(v.z() > kDegenerateTau)) throw DegeneracyError("non-visible normal: cannot integrate as height field");
    p.values[i] = -v.x() / v.z();
    q.values[i] = -v.y() / v.z();
  }

  const int nx = n.nx, ny = n.ny;
  const double h = n.spacing;
  auto idx = [nx](int c, int r) { return r * nx + c; };
  const int edges = (nx - 1) * ny + nx * (ny - 1);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * edges + 4);
  Eigen::VectorXd g(edges + 1);
  int e = 0;
  for (int r = 0; r < ny; ++r)
    for (int c = 0; c + 1 < nx; ++c, ++e) {
      trips.emplace_back(e, idx(c + 1, r), 1.0 / h);
      trips.emplace_back(e, idx(c, r), -1.0 / h);
      g(e) = 0.5 * (p.at(c, r) + p.at(c + 1, r));
    }
  for (int r = 0; r + 1 < ny; ++r)
    for (int c = 0; c < nx; ++c, ++e) {
      trips.emplace_back(e, idx(c, r + 1), 1.0 / h);
      trips.emplace_back(e, idx(c, r), -1.0 / h);
      g(e) = 0.5 * (q.at(c, r) + q.at(c, r + 1));
    }
  // Anchor row removes the constant null space.
  const int c0 = static_cast<int>(std::floor(p.center_col())), c1 = static_cast<int>(std::ceil(p.center_col()));
  const int r0 = static_cast<int>(std::floor(p.center_row())), r1 = static_cast<int>(std::ceil(p.center_row()));
  for (int c : {c0, c1})
    for (int r : {r0, r1}) trips.emplace_back(edges, idx(c, r), 0.25);
  g(edges) = 0.0;

  Eigen::SparseMatrix<double> a(edges + 1, nx * ny);
  a.setFromTriplets(trips.begin(), trips.end());
  const Eigen::SparseMatrix<double> normal = a.transpose() * a;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
  if (solver.info() != Eigen::Success) throw DegeneracyError("integrate_heights: factorization failed");
  const Eigen::VectorXd sol = solver.solve(a.transpose() * g);

  IntegrationResult out;
  out.heights = ScalarGrid(nx, ny, h);
  for (int i = 0; i < nx * ny; ++i) out.heights.values[i] = sol(i);
  const double anchor = center_value(out.heights);
  for (double& v : out.heights.values) v -= anchor;
  out.gradient_residual = std::sqrt((a.topRows(edges) * sol - g.head(edges)).squaredNorm() / edges);
  out.curl_residual = detail::discrete_curl_rms(p, q);
  return out;
}

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // 0-based, counter-clockwise seen from +z
};

inline Mesh export_mesh(const ScalarGrid& heights) {
  Mesh m;
  m.vertices.reserve(heights.size());
  for (int r = 0; r < heights.ny; ++r)
    for (int c = 0; c < heights.nx; ++c) {
      const auto p = heights.position(c, r);
      m.vertices.emplace_back(p.x(), p.y(), heights.at(c, r));
    }
  auto idx = [&](int c, int r) { return r * heights.nx + c; };
  for (int r = 0; r + 1 < heights.ny; ++r)
    for (int c = 0; c + 1 < heights.nx; ++c) {
      m.triangles.push_back({idx(c, r), idx(c + 1, r), idx(c + 1, r + 1)});
      m.triangles.push_back({idx(c, r), idx(c + 1, r + 1), idx(c, r + 1)});
    }
  return m;
}

/// Wavefront OBJ: "v x y z" lines, then "f i j k" with 1-based indices.
inline void write_obj(std::ostream& os, const Mesh& m) {
  for (const auto& v : m.vertices)
    os << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& t : m.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace tsfs
