#pragma once

// Inductive construction of the Taylor normal field in the canonical frame
// (N0, l_t, b), where N0 is the central normal, l_t the unit tangent-plane
// component of the light, and b = N0 x l_t. Row 1 of each order follows from
// the unit-length constraint, row 2 from the image, and row 3 is free: either
// the generic combination c1 r1 + c2 r2 or supplied by the caller.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

/// Lower bound on 1 - |i0| below which l_t is treated as undefined.
inline constexpr double kDegenerateTau = 1e-6;

struct CanonicalSolution {
  int order = 0;
  double i0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  std::vector<UnfoldedRows> rows;  // orders 1..order

  const UnfoldedRows& at(int j) const { return rows.at(j - 1); }

  /// The canonical-frame light (i0, sqrt(1 - i0^2), 0).
  Vec3 light() const { return Vec3(i0, std::sqrt(std::max(0.0, 1.0 - i0 * i0)), 0.0); }
};

/// r1^j = <D^j N, N0> from the lower orders, via repeated differentiation of
/// <N, N> = 1: 2 <D^j N, N0> = -sum_{a=1}^{j-1} sum_{|S|=a} <D^a N(S), D^{j-a} N(S^c)>.
/// Splits a and j - a contribute equally, so a < j/2 is counted in full and
/// a = j/2 once per unordered pair.
inline ScalarTensor normalization_row(std::span<const UnfoldedRows> lower, int j) {
  if (j < 1) throw ValidationError("normalization_row: order must be >= 1");
  if (static_cast<int>(lower.size()) < j - 1)
    throw ValidationError("normalization_row: order " + std::to_string(j) + " needs all " + std::to_string(j - 1) +
                          " lower orders");
  ScalarTensor row(j);
  for (int a = 1; 2 * a <= j; ++a) {
    const VecTensor p = lower[a - 1].columns();
    const VecTensor q = lower[j - a - 1].columns();
    if (p.order() != a || q.order() != j - a) throw ValidationError("normalization_row: lower rows out of order");
    const double weight = (2 * a == j) ? 0.5 : 1.0;
    row -= weight * inner_product(p, q);
  }
  return row;
}

inline void require_regular_intensity(double i0) {
  if (!(std::abs(i0) < 1.0 - kDegenerateTau)) throw DegeneracyError("degenerate: light parallel to central normal");
}

/// r2^j = (D^j I - i0 r1^j) / sqrt(1 - i0^2).
inline ScalarTensor lighting_row(const ScalarTensor& r1, const ScalarTensor& image_derivative, double i0) {
  require_regular_intensity(i0);
  r1.require_same_order(image_derivative);
  return (image_derivative - i0 * r1) * (1.0 / std::sqrt(1.0 - i0 * i0));
}

inline ScalarTensor generic_row(const ScalarTensor& r1, const ScalarTensor& r2, double c1, double c2) {
  return c1 * r1 + c2 * r2;
}

namespace detail {

template <typename ThirdRow>
CanonicalSolution induce(const ImageTensors& it, ThirdRow&& third_row) {
  it.validate();
  require_regular_intensity(it.i0);
  CanonicalSolution sol;
  sol.order = it.order;
  sol.i0 = it.i0;
  for (int j = 1; j <= it.order; ++j) {
    UnfoldedRows rows;
    rows.r1 = j == 1 ? ScalarTensor(1) : normalization_row(sol.rows, j);
    rows.r2 = lighting_row(rows.r1, it.derivative(j), it.i0);
    rows.r3 = third_row(j, rows.r1, rows.r2);
    sol.rows.push_back(std::move(rows));
  }
  return sol;
}

}  // namespace detail

/// Generic member of the solution family: r3^j = c1 r1^j + c2 r2^j.
inline CanonicalSolution solve_generic(const ImageTensors& it, double c1, double c2) {
  auto sol = detail::induce(it, [&](int, const ScalarTensor& r1, const ScalarTensor& r2) {
    return generic_row(r1, r2, c1, c2);
  });
  sol.c1 = c1;
  sol.c2 = c2;
  return sol;
}

/// Arbitrary member: r3^j taken verbatim from `third_rows[j-1]`.
inline CanonicalSolution solve_with_rows(const ImageTensors& it, std::span<const ScalarTensor> third_rows) {
  if (static_cast<int>(third_rows.size()) != it.order)
    throw ValidationError("solve_with_rows: expected " + std::to_string(it.order) + " third rows, got " +
                          std::to_string(third_rows.size()));
  for (int j = 1; j <= it.order; ++j)
    if (third_rows[j - 1].order() != j)
      throw ValidationError("solve_with_rows: third row " + std::to_string(j) + " has order " +
                            std::to_string(third_rows[j - 1].order()));
  return detail::induce(it, [&](int j, const ScalarTensor&, const ScalarTensor&) { return third_rows[j - 1]; });
}

/// Canonical-frame Taylor normal field (1,0,0) + sum_j (1/j!) D^j N(v, ..., v).
inline Vec3 eval_normal_taylor(const CanonicalSolution& sol, double x, double y) {
  Vec3 n(1.0, 0.0, 0.0);
  for (const auto& rows : sol.rows) {
    const VecTensor cols = rows.columns();
    n += taylor_sum<Vec3>(std::span<const VecTensor>(&cols, 1), x, y);
  }
  return n;
}

/// |<N_bar, N_bar> - 1| over the disc of the given radius, sampled on a
/// samples x samples lattice covering its bounding square.
inline ErrorStats epsilon_error(const CanonicalSolution& sol, double radius, int samples = 61) {
  if (!(radius > 0.0)) throw ValidationError("epsilon_error: radius must be positive");
  if (samples < 2) throw ValidationError("epsilon_error: need at least 2 samples");
  ErrorStats s;
  double sq = 0.0;
  int count = 0;
  const double step = 2.0 * radius / (samples - 1);
  for (int r = 0; r < samples; ++r) {
    for (int c = 0; c < samples; ++c) {
      const double x = -radius + c * step;
      const double y = -radius + r * step;
      if (x * x + y * y > radius * radius * (1.0 + 1e-12)) continue;
      const double e = std::abs(eval_normal_taylor(sol, x, y).squaredNorm() - 1.0);
      s.max = std::max(s.max, e);
      sq += e * e;
      ++count;
    }
  }
  s.rms = count > 0 ? std::sqrt(sq / count) : 0.0;
  return s;
}

}  // namespace tsfs
