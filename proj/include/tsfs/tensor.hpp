#pragma once

// Symmetric derivative tensors on R^2. An order-j tensor is stored by its j+1
// distinct entries: entry (a, b), a + b = j, is the tensor applied to a copies
// of e1 and b copies of e2. Full 2^j-column unfoldings are produced on demand.

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "tsfs/combinatorics.hpp"
#include "tsfs/errors.hpp"
#include "tsfs/jet.hpp"

namespace tsfs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

template <typename Value>
inline Value zero_value() {
  if constexpr (std::is_same_v<Value, double>) {
    return 0.0;
  } else {
    return Value::Zero();
  }
}

template <typename Value>
class DerivTensor {
  static_assert(std::is_same_v<Value, double> || std::is_same_v<Value, Vec3>,
                "DerivTensor values are scalars or 3-vectors");

 public:
  static constexpr int kValueDim = std::is_same_v<Value, double> ? 1 : 3;

  DerivTensor() : DerivTensor(0) {}
  explicit DerivTensor(int order) : order_(order) {
    if (order < 0) throw ValidationError("negative tensor order");
    entries_.assign(order + 1, zero_value<Value>());
  }

  int order() const { return order_; }
  static constexpr int value_dim() { return kValueDim; }

  const Value& entry(int a, int b) const { return entries_[checked(a, b)]; }
  Value& entry(int a, int b) { return entries_[checked(a, b)]; }

  /// Entries ordered by the number of e2 inputs, b = 0..order.
  const std::vector<Value>& entries() const { return entries_; }

  /// Entrywise map; used for projections and linear combinations.
  template <typename F>
  auto map(F&& f) const {
    using Out = std::decay_t<decltype(f(entries_[0]))>;
    DerivTensor<Out> r(order_);
    for (int b = 0; b <= order_; ++b) r.entry(order_ - b, b) = f(entries_[b]);
    return r;
  }

  DerivTensor& operator+=(const DerivTensor& o) {
    require_same_order(o);
    for (int i = 0; i <= order_; ++i) entries_[i] += o.entries_[i];
    return *this;
  }
  DerivTensor& operator-=(const DerivTensor& o) {
    require_same_order(o);
    for (int i = 0; i <= order_; ++i) entries_[i] -= o.entries_[i];
    return *this;
  }
  DerivTensor& operator*=(double s) {
    for (auto& e : entries_) e *= s;
    return *this;
  }
  friend DerivTensor operator+(DerivTensor u, const DerivTensor& v) { return u += v; }
  friend DerivTensor operator-(DerivTensor u, const DerivTensor& v) { return u -= v; }
  friend DerivTensor operator*(double s, DerivTensor u) { return u *= s; }
  friend DerivTensor operator*(DerivTensor u, double s) { return u *= s; }

  bool operator==(const DerivTensor& o) const { return order_ == o.order_ && entries_ == o.entries_; }

  void require_same_order(const DerivTensor& o) const {
    if (o.order_ != order_) {
      throw ValidationError("tensor order mismatch: " + std::to_string(order_) + " vs " +
                            std::to_string(o.order_));
    }
  }

 private:
  int checked(int a, int b) const {
    if (a < 0 || b < 0 || a + b != order_) {
      throw ValidationError("multi-index (" + std::to_string(a) + "," + std::to_string(b) +
                            ") invalid for order " + std::to_string(order_));
    }
    return b;
  }

  int order_;
  std::vector<Value> entries_;
};

using ScalarTensor = DerivTensor<double>;
using VecTensor = DerivTensor<Vec3>;

/// Rows (r1, r2, r3) of a vector-valued tensor expressed in some orthonormal
/// frame, each in symmetric storage.
struct UnfoldedRows {
  ScalarTensor r1, r2, r3;

  int order() const { return r1.order(); }

  const ScalarTensor& row(int i) const { return i == 0 ? r1 : (i == 1 ? r2 : r3); }

  VecTensor columns() const {
    VecTensor t(order());
    for (int b = 0; b <= order(); ++b) {
      const int a = order() - b;
      t.entry(a, b) = Vec3(r1.entry(a, b), r2.entry(a, b), r3.entry(a, b));
    }
    return t;
  }

  static UnfoldedRows from_columns(const VecTensor& t) {
    return {t.map([](const Vec3& v) { return v.x(); }), t.map([](const Vec3& v) { return v.y(); }),
            t.map([](const Vec3& v) { return v.z(); })};
  }
};

/// Full unfolding: value_dim x 2^j. Column c reads bit i (most significant
/// first) of c as the i-th input: 0 -> e1, 1 -> e2.
template <typename Value>
Eigen::MatrixXd unfold(const DerivTensor<Value>& t) {
  const int j = t.order();
  const long cols = 1L << j;
  Eigen::MatrixXd m(t.value_dim(), cols);
  for (long c = 0; c < cols; ++c) {
    const int b = __builtin_popcountl(static_cast<unsigned long>(c));
    if constexpr (std::is_same_v<Value, double>) {
      m(0, c) = t.entry(j - b, b);
    } else {
      m.col(c) = t.entry(j - b, b);
    }
  }
  return m;
}

/// Multilinear evaluation on j input vectors. Contracts one slot at a time in
/// symmetric storage: S(a, b) = x T(a+1, b) + y T(a, b+1).
template <typename Value>
Value apply_tensor(const DerivTensor<Value>& t, std::span<const Eigen::Vector2d> inputs) {
  if (static_cast<int>(inputs.size()) != t.order()) {
    throw ValidationError("apply_tensor: tensor of order " + std::to_string(t.order()) + " needs " +
                          std::to_string(t.order()) + " inputs, got " + std::to_string(inputs.size()));
  }
  std::vector<Value> cur = t.entries();  // indexed by b
  for (const auto& v : inputs) {
    const int k = static_cast<int>(cur.size()) - 1;
    std::vector<Value> next(k, zero_value<Value>());
    for (int b = 0; b < k; ++b) next[b] = v.x() * cur[b] + v.y() * cur[b + 1];
    cur = std::move(next);
  }
  return cur[0];
}

/// Contraction <p, q> of two vector-valued tensors into a symmetric scalar
/// tensor of order a + (j - a), summing over every assignment of a of the j
/// input slots to p. For a target with A e1-slots and B e2-slots the subset sum
/// collapses to sum_k C(A,k) C(B,a-k) <p(k, a-k), q(A-k, B-a+k)>.
inline ScalarTensor inner_product(const VecTensor& p, const VecTensor& q) {
  const int a = p.order();
  const int j = a + q.order();
  ScalarTensor r(j);
  for (int B = 0; B <= j; ++B) {
    const int A = j - B;
    double sum = 0.0;
    for (int k = std::max(0, a - B); k <= std::min(A, a); ++k) {
      sum += binomial(A, k) * binomial(B, a - k) * p.entry(k, a - k).dot(q.entry(A - k, B - a + k));
    }
    r.entry(A, B) = sum;
  }
  return r;
}

inline ScalarTensor inner_product_rows(const UnfoldedRows& p, const UnfoldedRows& q) {
  return inner_product(p.columns(), q.columns());
}

inline bool is_orthonormal(const Mat3& r, double tol = 1e-10) {
  return ((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
}

/// Left-multiplies every 3-vector entry by `rotation`.
inline VecTensor rotate_tensor(const VecTensor& t, const Mat3& rotation) {
  if (!is_orthonormal(rotation)) throw ValidationError("rotate_tensor: matrix is not orthonormal");
  return t.map([&](const Vec3& v) -> Vec3 { return rotation * v; });
}

/// Derivative tensors D^0..D^max_order at the origin: entry (a, b) of order j
/// is a! b! times the Taylor coefficient.
inline std::vector<ScalarTensor> jets_to_tensors(const Jet2& jet, int max_order) {
  if (max_order > jet.order() || max_order < 0) {
    throw ValidationError("jets_to_tensors: max_order " + std::to_string(max_order) + " exceeds jet order " +
                          std::to_string(jet.order()));
  }
  std::vector<ScalarTensor> out;
  for (int j = 0; j <= max_order; ++j) {
    ScalarTensor t(j);
    for (int b = 0; b <= j; ++b) t.entry(j - b, b) = factorial(j - b) * factorial(b) * jet.coeff(j - b, b);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<VecTensor> jets_to_tensors(const VecJet2& jet, int max_order) {
  std::array<std::vector<ScalarTensor>, 3> comps;
  for (int i = 0; i < 3; ++i) comps[i] = jets_to_tensors(jet[i], max_order);
  std::vector<VecTensor> out;
  for (int j = 0; j <= max_order; ++j) out.push_back(UnfoldedRows{comps[0][j], comps[1][j], comps[2][j]}.columns());
  return out;
}

/// Inverse of jets_to_tensors.
inline Jet2 tensors_to_jet(std::span<const ScalarTensor> tensors) {
  if (tensors.empty()) throw ValidationError("tensors_to_jet: no tensors");
  Jet2 jet(static_cast<int>(tensors.size()) - 1);
  for (const auto& t : tensors) {
    const int j = t.order();
    for (int b = 0; b <= j; ++b) jet.at(j - b, b) = t.entry(j - b, b) / (factorial(j - b) * factorial(b));
  }
  return jet;
}

/// sum over the given tensors of (1/j!) sum_{a+b=j} C(j,a) x^a y^b T_j(a,b).
template <typename Value>
Value taylor_sum(std::span<const DerivTensor<Value>> tensors, double x, double y) {
  Value sum = zero_value<Value>();
  for (const auto& t : tensors) {
    const int j = t.order();
    for (int b = 0; b <= j; ++b) {
      const int a = j - b;
      sum += (std::pow(x, a) * std::pow(y, b) / (factorial(a) * factorial(b))) * t.entry(a, b);
    }
  }
  return sum;
}

}  // namespace tsfs
