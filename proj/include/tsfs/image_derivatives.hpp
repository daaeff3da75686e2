#pragma once

// Image derivative tensors D^0 I .. D^n I at a patch center, either computed
// exactly from an analytic height field and light or fitted to a sampled
// patch by least squares.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/grid.hpp"
#include "tsfs/jet.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

inline constexpr int kMaxImageOrder = 8;

struct ImageTensors {
  int order = 0;
  double i0 = 0.0;
  std::vector<ScalarTensor> tensors;  // orders 1..order

  const ScalarTensor& derivative(int j) const {
    if (j < 1 || j > order) throw ValidationError("image tensor order " + std::to_string(j) + " not present");
    return tensors[j - 1];
  }

  void validate() const {
    if (order < 0 || static_cast<int>(tensors.size()) != order)
      throw ValidationError("image tensors: expected " + std::to_string(order) + " tensors, found " +
                            std::to_string(tensors.size()));
    for (int j = 1; j <= order; ++j)
      if (tensors[j - 1].order() != j) throw ValidationError("image tensors: entry " + std::to_string(j) + " has wrong order");
    if (std::abs(i0) > 1.0) throw ValidationError("image tensors: |i0| must be <= 1 for a unit light and normal");
  }
};

struct ErrorStats {
  double max = 0.0;
  double rms = 0.0;
};

/// Built-in analytic height fields z = f(x, y) with f(0,0) = 0.
class Scene {
 public:
  enum class Kind { Cylinder, Sphere, Polynomial };

  /// Cylinder of the given radius with its axis along y.
  static Scene cylinder(double radius = 1.0) { return Scene(Kind::Cylinder, radius, {}); }
  /// Spherical cap of the given radius.
  static Scene sphere(double radius = 1.0) { return Scene(Kind::Sphere, radius, {}); }
  /// f = sum c_ab x^a y^b.
  static Scene polynomial(std::map<std::pair<int, int>, double> coeffs) {
    return Scene(Kind::Polynomial, 1.0, std::move(coeffs));
  }

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }
  const std::map<std::pair<int, int>, double>& coefficients() const { return coeffs_; }

  Jet2 height_jet(int order) const {
    if (kind_ == Kind::Polynomial) {
      Jet2 f(order);
      for (const auto& [ab, c] : coeffs_)
        if (ab.first + ab.second <= order) f.at(ab.first, ab.second) += c;
      return f;
    }
    const Jet2 x = Jet2::variable(order, 0);
    Jet2 under = Jet2::constant(order, radius_ * radius_) - x * x;
    if (kind_ == Kind::Sphere) {
      const Jet2 y = Jet2::variable(order, 1);
      under -= y * y;
    }
    return jet_sqrt(under) - Jet2::constant(order, radius_);
  }

  double height(double x, double y) const {
    switch (kind_) {
      case Kind::Cylinder:
        return std::sqrt(radius_ * radius_ - x * x) - radius_;
      case Kind::Sphere:
        return std::sqrt(radius_ * radius_ - x * x - y * y) - radius_;
      case Kind::Polynomial:
        break;
    }
    double f = 0.0;
    for (const auto& [ab, c] : coeffs_) f += c * std::pow(x, ab.first) * std::pow(y, ab.second);
    return f;
  }

  /// Exact unit normal (-f_x, -f_y, 1) / |.| at a point.
  Vec3 normal(double x, double y) const {
    switch (kind_) {
      case Kind::Cylinder:
        return Vec3(x, 0.0, std::sqrt(radius_ * radius_ - x * x)) / radius_;
      case Kind::Sphere:
        return Vec3(x, y, std::sqrt(radius_ * radius_ - x * x - y * y)) / radius_;
      case Kind::Polynomial:
        break;
    }
    double fx = 0.0, fy = 0.0;
    for (const auto& [ab, c] : coeffs_) {
      const auto [a, b] = ab;
      if (a > 0) fx += c * a * std::pow(x, a - 1) * std::pow(y, b);
      if (b > 0) fy += c * b * std::pow(x, a) * std::pow(y, b - 1);
    }
    return Vec3(-fx, -fy, 1.0).normalized();
  }

 private:
  Scene(Kind kind, double radius, std::map<std::pair<int, int>, double> coeffs)
      : kind_(kind), radius_(radius), coeffs_(std::move(coeffs)) {
    if (!(radius_ > 0.0)) throw ValidationError("scene radius must be positive");
  }

  Kind kind_;
  double radius_;
  std::map<std::pair<int, int>, double> coeffs_;
};

inline void require_unit_light(const Vec3& light) {
  if (std::abs(light.norm() - 1.0) > 1e-10) throw ValidationError("light direction must be unit length");
}

/// Exact D^j I = L^T D^j N (unit albedo) from a height jet of order >= n + 1.
inline ImageTensors derive_from_scene(const Jet2& height, const Vec3& light, int order) {
  require_unit_light(light);
  if (order < 1 || order > kMaxImageOrder)
    throw ValidationError("order must be in [1, " + std::to_string(kMaxImageOrder) + "]");
  if (height.order() < order + 1)
    throw ValidationError("height jet order " + std::to_string(height.order()) + " too low for image order " +
                          std::to_string(order));
  const VecJet2 normal = height_to_normal_jets(height);
  const auto dn = jets_to_tensors(normal, order);
  ImageTensors it;
  it.order = order;
  it.i0 = light.dot(dn[0].entry(0, 0));
  if (std::abs(it.i0) >= 1.0 - 1e-6) throw DegeneracyError("light parallel to normal: l_t undefined");
  for (int j = 1; j <= order; ++j) it.tensors.push_back(dn[j].map([&](const Vec3& v) { return light.dot(v); }));
  return it;
}

inline ImageTensors derive_from_scene(const Scene& scene, const Vec3& light, int order) {
  return derive_from_scene(scene.height_jet(order + 1), light, order);
}

/// Raw L.N samples of an analytic scene (negative values kept).
inline ScalarGrid render_scene(const Scene& scene, const Vec3& light, const GridSpec& spec) {
  require_unit_light(light);
  auto g = spec.make<double>();
  for (int r = 0; r < g.ny; ++r)
    for (int c = 0; c < g.nx; ++c) {
      const auto p = g.position(c, r);
      g.at(c, r) = light.dot(scene.normal(p.x(), p.y()));
    }
  return g;
}

inline VectorGrid scene_normals(const Scene& scene, const GridSpec& spec) {
  auto g = spec.make<Vec3>();
  for (int r = 0; r < g.ny; ++r)
    for (int c = 0; c < g.nx; ++c) {
      const auto p = g.position(c, r);
      g.at(c, r) = scene.normal(p.x(), p.y());
    }
  return g;
}

inline double eval_image_taylor(const ImageTensors& it, double x, double y) {
  return it.i0 + taylor_sum<double>(it.tensors, x, y);
}

struct FitResult {
  ImageTensors tensors;
  double residual_rms = 0.0;
  double condition_number = 0.0;
  bool ill_conditioned = false;
};

/// Total-degree least-squares polynomial fit about the patch center. The
/// coordinates are scaled so the farthest sample sits at radius 1.
inline FitResult fit_from_samples(const ScalarGrid& img, int order) {
  if (order < 0 || order > kMaxImageOrder)
    throw ValidationError("fit order must be in [0, " + std::to_string(kMaxImageOrder) + "]");
  if (img.nx < 3 || img.ny < 3) throw ValidationError("fit: grid must be at least 3x3");
  const int terms = triangular_size(order);
  const auto n = static_cast<Eigen::Index>(img.size());
  if (n < terms)
    throw ValidationError("fit: " + std::to_string(n) + " samples cannot determine " + std::to_string(terms) +
                          " coefficients");

  const double scale = img.max_radius();
  Eigen::MatrixXd design(n, terms);
  Eigen::VectorXd rhs(n);
  for (int r = 0; r < img.ny; ++r) {
    for (int c = 0; c < img.nx; ++c) {
      const Eigen::Index i = static_cast<Eigen::Index>(r) * img.nx + c;
      const Eigen::Vector2d p = img.position(c, r) / scale;
      int col = 0;
      for (int d = 0; d <= order; ++d)
        for (int b = 0; b <= d; ++b) design(i, col++) = std::pow(p.x(), d - b) * std::pow(p.y(), b);
      rhs(i) = img.at(c, r);
    }
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < terms) throw ValidationError("fit: sample layout is rank deficient for this order");
  const Eigen::VectorXd coef = qr.solve(rhs);

  FitResult out;
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(design);
  const auto& sv = svd.singularValues();
  out.condition_number = sv(0) / sv(sv.size() - 1);
  out.ill_conditioned = out.condition_number > 1e10;
  out.residual_rms = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));

  ImageTensors& it = out.tensors;
  it.order = order;
  it.i0 = coef(0);
  int col = 1;
  for (int d = 1; d <= order; ++d) {
    ScalarTensor t(d);
    const double unscale = std::pow(scale, -d);
    for (int b = 0; b <= d; ++b) t.entry(d - b, b) = factorial(d - b) * factorial(b) * coef(col++) * unscale;
    it.tensors.push_back(std::move(t));
  }
  return out;
}

/// Pointwise |truth - I_bar| over the grid.
inline ErrorStats delta_error(const ImageTensors& it, const ScalarGrid& truth) {
  ErrorStats s;
  double sq = 0.0;
  for (int r = 0; r < truth.ny; ++r)
    for (int c = 0; c < truth.nx; ++c) {
      const auto p = truth.position(c, r);
      const double e = std::abs(truth.at(c, r) - eval_image_taylor(it, p.x(), p.y()));
      s.max = std::max(s.max, e);
      sq += e * e;
    }
  s.rms = std::sqrt(sq / static_cast<double>(truth.size()));
  return s;
}

}  // namespace tsfs
