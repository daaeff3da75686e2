#pragma once

#include <cstdint>

namespace tsfs {

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Binomial coefficient as a double; zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Number of monomials x^a y^b with a + b <= order.
constexpr int triangular_size(int order) { return (order + 1) * (order + 2) / 2; }

}  // namespace tsfs
