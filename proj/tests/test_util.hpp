#pragma once

#include <random>

#include "tsfs/jet.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs::test {

inline Jet2 random_jet(std::mt19937_64& rng, int order, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Jet2 j(order);
  for (int d = 0; d <= order; ++d)
    for (int b = 0; b <= d; ++b) j.at(d - b, b) = u(rng);
  return j;
}

inline double max_abs_diff(const Jet2& u, const Jet2& v) {
  double m = 0.0;
  for (int d = 0; d <= std::max(u.order(), v.order()); ++d)
    for (int b = 0; b <= d; ++b) m = std::max(m, std::abs(u.coeff(d - b, b) - v.coeff(d - b, b)));
  return m;
}

inline ScalarTensor scalar_tensor(std::initializer_list<double> entries_by_b) {
  ScalarTensor t(static_cast<int>(entries_by_b.size()) - 1);
  int b = 0;
  for (double v : entries_by_b) {
    t.entry(t.order() - b, b) = v;
    ++b;
  }
  return t;
}

}  // namespace tsfs::test
