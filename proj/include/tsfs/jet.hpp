#pragma once

// Truncated bivariate Taylor series ("jets") with exact arithmetic through a
// fixed total order. Coefficients are Taylor coefficients: the entry at (a, b)
// multiplies x^a y^b and equals d^{a+b}/dx^a dy^b / (a! b!) at the origin.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tsfs/combinatorics.hpp"
#include "tsfs/errors.hpp"

namespace tsfs {

class Jet2 {
 public:
  static constexpr int kMaxOrder = 12;

  Jet2() : Jet2(0) {}

  explicit Jet2(int order) : order_(order) {
    if (order < 0 || order > kMaxOrder) {
      throw ValidationError("jet order " + std::to_string(order) + " outside [0, " +
                            std::to_string(kMaxOrder) + "]");
    }
    coeffs_.assign(triangular_size(order), 0.0);
  }

  static Jet2 constant(int order, double value) {
    Jet2 j(order);
    j.coeffs_[0] = value;
    return j;
  }

  /// The coordinate function x (or y when `axis == 1`), truncated to `order`.
  static Jet2 variable(int order, int axis) {
    Jet2 j(order);
    if (order >= 1) j.at(axis == 0 ? 1 : 0, axis == 0 ? 0 : 1) = 1.0;
    return j;
  }

  int order() const { return order_; }

  /// Missing multi-indices read as zero.
  double coeff(int a, int b) const {
    if (a < 0 || b < 0 || a + b > order_) return 0.0;
    return coeffs_[index(a, b)];
  }

  double& at(int a, int b) {
    if (a < 0 || b < 0 || a + b > order_) {
      throw ValidationError("jet multi-index (" + std::to_string(a) + "," + std::to_string(b) +
                            ") outside order " + std::to_string(order_));
    }
    return coeffs_[index(a, b)];
  }

  Jet2 truncated(int order) const {
    Jet2 r(order);
    for (int d = 0; d <= std::min(order, order_); ++d)
      for (int b = 0; b <= d; ++b) r.at(d - b, b) = coeff(d - b, b);
    return r;
  }

  /// Partial derivative along x (axis 0) or y (axis 1); the result has order - 1.
  Jet2 derivative(int axis) const {
    if (order_ == 0) throw ValidationError("cannot differentiate an order-0 jet");
    Jet2 r(order_ - 1);
    for (int d = 0; d < order_; ++d) {
      for (int b = 0; b <= d; ++b) {
        const int a = d - b;
        r.at(a, b) = axis == 0 ? (a + 1) * coeff(a + 1, b) : (b + 1) * coeff(a, b + 1);
      }
    }
    return r;
  }

  double evaluate(double x, double y) const {
    // Horner in y for each x power.
    double sum = 0.0;
    double xp = 1.0;
    for (int a = 0; a <= order_; ++a) {
      double inner = 0.0;
      for (int b = order_ - a; b >= 0; --b) inner = inner * y + coeffs_[index(a, b)];
      sum += xp * inner;
      xp *= x;
    }
    return sum;
  }

  Jet2& operator+=(const Jet2& o) {
    require_same_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    require_same_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  Jet2& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }

  friend Jet2 operator+(Jet2 u, const Jet2& v) { return u += v; }
  friend Jet2 operator-(Jet2 u, const Jet2& v) { return u -= v; }
  friend Jet2 operator*(Jet2 u, double s) { return u *= s; }
  friend Jet2 operator*(double s, Jet2 u) { return u *= s; }
  friend Jet2 operator-(Jet2 u) { return u *= -1.0; }

  void require_same_order(const Jet2& o) const {
    if (o.order_ != order_) {
      throw ValidationError("jet order mismatch: " + std::to_string(order_) + " vs " +
                            std::to_string(o.order_));
    }
  }

 private:
  static int index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

  int order_;
  std::vector<double> coeffs_;
};

/// Cauchy product truncated at the common order.
inline Jet2 jet_multiply(const Jet2& u, const Jet2& v) {
  u.require_same_order(v);
  const int n = u.order();
  Jet2 r(n);
  for (int a1 = 0; a1 <= n; ++a1) {
    for (int b1 = 0; a1 + b1 <= n; ++b1) {
      const double cu = u.coeff(a1, b1);
      if (cu == 0.0) continue;
      for (int a2 = 0; a1 + b1 + a2 <= n; ++a2)
        for (int b2 = 0; a1 + b1 + a2 + b2 <= n; ++b2) r.at(a1 + a2, b1 + b2) += cu * v.coeff(a2, b2);
    }
  }
  return r;
}

inline Jet2 operator*(const Jet2& u, const Jet2& v) { return jet_multiply(u, v); }

/// 1/sqrt(u) by Newton iteration on jets, w <- w + w (1 - u w^2) / 2.
/// Each step doubles the number of correct orders (m -> 2m + 1).
inline Jet2 jet_inv_sqrt(const Jet2& u) {
  const double u0 = u.coeff(0, 0);
  if (!(u0 > 0.0)) {
    throw DegeneracyError("jet_inv_sqrt: constant term must be positive (got " + std::to_string(u0) +
                          ")");
  }
  const int n = u.order();
  Jet2 w = Jet2::constant(n, 1.0 / std::sqrt(u0));
  for (int correct = 0; correct < n; correct = 2 * correct + 1) {
    Jet2 residual = Jet2::constant(n, 1.0) - u * (w * w);
    w += 0.5 * (w * residual);
  }
  return w;
}

inline Jet2 jet_sqrt(const Jet2& u) { return u * jet_inv_sqrt(u); }

/// Three equal-order jets: the x, y, z components of a vector field.
class VecJet2 {
 public:
  VecJet2() = default;
  VecJet2(Jet2 x, Jet2 y, Jet2 z) : c_{std::move(x), std::move(y), std::move(z)} {
    c_[0].require_same_order(c_[1]);
    c_[0].require_same_order(c_[2]);
  }

  int order() const { return c_[0].order(); }
  const Jet2& operator[](int i) const { return c_[i]; }

  Eigen::Vector3d evaluate(double x, double y) const {
    return {c_[0].evaluate(x, y), c_[1].evaluate(x, y), c_[2].evaluate(x, y)};
  }

  /// Taylor coefficient (a, b) of every component.
  Eigen::Vector3d coeff(int a, int b) const { return {c_[0].coeff(a, b), c_[1].coeff(a, b), c_[2].coeff(a, b)}; }

  Jet2 dot(const VecJet2& o) const { return c_[0] * o.c_[0] + c_[1] * o.c_[1] + c_[2] * o.c_[2]; }

 private:
  std::array<Jet2, 3> c_;
};

/// Unit upward normal (-f_x, -f_y, 1) / sqrt(1 + f_x^2 + f_y^2) of the height
/// field z = f(x, y). The result has order f.order() - 1.
inline VecJet2 height_to_normal_jets(const Jet2& f) {
  if (f.order() < 1) throw ValidationError("height_to_normal_jets: height jet order must be >= 1");
  const Jet2 fx = f.derivative(0);
  const Jet2 fy = f.derivative(1);
  const int n = fx.order();
  const Jet2 scale = jet_inv_sqrt(Jet2::constant(n, 1.0) + fx * fx + fy * fy);
  return VecJet2(-(scale * fx), -(scale * fy), scale);
}

}  // namespace tsfs
