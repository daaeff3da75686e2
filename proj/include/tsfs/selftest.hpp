#pragma once

// Built-in invariant checks behind `verify`: randomized oracle comparisons
// against exact jet arithmetic, plus per-solution consistency checks.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tsfs/genericity.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/jet.hpp"
#include "tsfs/reconstruction.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// max |x - y| / max(1, max |y|) over entries.
inline double relative_error(const ScalarTensor& x, const ScalarTensor& y) {
  double diff = 0.0, scale = 1.0;
  for (int b = 0; b <= x.order(); ++b) {
    diff = std::max(diff, std::abs(x.entries()[b] - y.entries()[b]));
    scale = std::max(scale, std::abs(y.entries()[b]));
  }
  return diff / scale;
}

/// Random height polynomial with total degree in [1, degree], f(0,0) = 0.
inline Jet2 random_height(std::mt19937_64& rng, int degree, int jet_order, double amplitude = 0.5) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  Jet2 f(jet_order);
  for (int d = 1; d <= std::min(degree, jet_order); ++d)
    for (int b = 0; b <= d; ++b) f.at(d - b, b) = u(rng);
  return f;
}

/// Random unit light making |L . N0| comfortably < 1 for the given height.
inline Vec3 random_light(std::mt19937_64& rng, const Vec3& n0) {
  std::normal_distribution<double> g;
  for (;;) {
    Vec3 l(g(rng), g(rng), std::abs(g(rng)) + 0.5);
    l.normalize();
    if (std::abs(l.dot(n0)) < 0.95) return l;
  }
}

/// Canonical rows of the true normal derivatives: P^T D^j N for j = 1..n.
inline std::vector<UnfoldedRows> true_canonical_rows(const std::vector<VecTensor>& dn, const ScenePose& frame) {
  std::vector<UnfoldedRows> rows;
  for (std::size_t j = 1; j < dn.size(); ++j)
    rows.push_back(UnfoldedRows::from_columns(dn[j].map([&](const Vec3& v) -> Vec3 { return frame.projection() * v; })));
  return rows;
}

inline CheckResult check_normalization_oracle(int trials = 100, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> degree(2, 6);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int n = degree(rng);
    const VecJet2 normal = height_to_normal_jets(random_height(rng, n, 7));
    const auto dn = jets_to_tensors(normal, 6);
    std::vector<UnfoldedRows> lower;
    for (int j = 1; j <= 6; ++j) {
      const ScalarTensor expected = dn[j].map([&](const Vec3& v) { return v.dot(dn[0].entry(0, 0)); });
      const ScalarTensor got = j == 1 ? ScalarTensor(1) : normalization_row(lower, j);
      worst = std::max(worst, relative_error(got, expected));
      lower.push_back(UnfoldedRows::from_columns(dn[j]));
    }
  }
  return {"normalization rows match jet <D^j N, N0>", worst < 1e-9, "max relative error " + format_double(worst)};
}

inline double coefficient_fidelity_error(const CanonicalSolution& sol, const ImageTensors& it) {
  const double s = std::sqrt(1.0 - sol.i0 * sol.i0);
  double worst = 0.0;
  for (int j = 1; j <= sol.order; ++j) {
    const ScalarTensor rendered = sol.i0 * sol.at(j).r1 + s * sol.at(j).r2;
    for (int b = 0; b <= j; ++b)
      worst = std::max(worst, std::abs(rendered.entries()[b] - it.derivative(j).entries()[b]));
  }
  return worst;
}

inline CheckResult check_coefficient_fidelity(int trials = 50, std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Jet2 f = random_height(rng, 5, 6);
    const Vec3 n0 = height_to_normal_jets(f).evaluate(0, 0);
    const ImageTensors it = derive_from_scene(f, random_light(rng, n0), 5);
    worst = std::max(worst, coefficient_fidelity_error(solve_generic(it, c(rng), c(rng)), it));
  }
  return {"rendered Taylor coefficients equal image coefficients", worst < 1e-12, "max abs error " + format_double(worst)};
}

inline CheckResult check_projection_recovery(int trials = 50, std::uint64_t seed = 13) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Jet2 f = random_height(rng, 5, 6);
    const VecJet2 normal = height_to_normal_jets(f);
    const auto dn = jets_to_tensors(normal, 5);
    const Vec3 n0 = dn[0].entry(0, 0);
    const Vec3 light = random_light(rng, n0);
    const auto truth = true_canonical_rows(dn, pose_from_scene(n0, light));
    // The true field is generally not generic, so feed it its own third rows.
    std::vector<ScalarTensor> third;
    for (const auto& r : truth) third.push_back(r.r3);
    const CanonicalSolution sol = solve_with_rows(derive_from_scene(f, light, 5), third);
    for (int j = 1; j <= 5; ++j) {
      worst = std::max(worst, relative_error(sol.at(j).r1, truth[j - 1].r1));
      worst = std::max(worst, relative_error(sol.at(j).r2, truth[j - 1].r2));
    }
  }
  return {"r1, r2 equal rows 1-2 of P^T D^j N for known scenes", worst < 1e-9,
          "max relative error " + format_double(worst)};
}

inline CheckResult check_generic_rank(int trials = 50, std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    const Jet2 f = random_height(rng, 5, 6);
    const Vec3 n0 = height_to_normal_jets(f).evaluate(0, 0);
    const ImageTensors it = derive_from_scene(f, random_light(rng, n0), 5);
    if (genericity_score(solve_generic(it, c(rng), c(rng)), it).rank_estimate != 2) ++failures;
  }
  return {"generic solutions have rank-2 beta", failures == 0, std::to_string(failures) + " of " +
                                                                   std::to_string(trials) + " not rank 2"};
}

inline CheckResult check_pose_invariance(int poses = 20, std::uint64_t seed = 19) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-3.0, 3.0);
  const ImageTensors it = derive_from_scene(Scene::cylinder(1.0), Vec3(0.48, 0.36, 0.8), 5);
  const CanonicalSolution sol = solve_generic(it, 0.5, 0.5);
  const GridSpec grid{33, 0.3};
  ScalarGrid reference;
  double worst = 0.0;
  for (int p = 0; p < poses; ++p) {
    const ScenePose pose = pose_from_angles(angle(rng), angle(rng), angle(rng));
    const ScalarGrid img = render_lambertian(world_normal_field(sol, pose, grid), pose.world_light(sol.i0));
    if (p == 0) {
      reference = img;
      continue;
    }
    for (std::size_t i = 0; i < img.size(); ++i) worst = std::max(worst, std::abs(img.values[i] - reference.values[i]));
  }
  return {"rendered image is independent of pose", worst < 1e-12, "max abs difference " + format_double(worst)};
}

inline CheckResult check_inv_sqrt_identity(int trials = 50, std::uint64_t seed = 23) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Jet2 x(8);
    for (int d = 0; d <= 8; ++d)
      for (int b = 0; b <= d; ++b) x.at(d - b, b) = u(rng);
    x.at(0, 0) = 4.0;
    const Jet2 w = jet_inv_sqrt(x);
    const Jet2 one = w * w * x;
    for (int d = 0; d <= 8; ++d)
      for (int b = 0; b <= d; ++b) worst = std::max(worst, std::abs(one.coeff(d - b, b) - (d == 0 ? 1.0 : 0.0)));
  }
  return {"inv_sqrt(u)^2 u = 1 through the jet order", worst < 1e-12, "max abs error " + format_double(worst)};
}

inline std::vector<CheckResult> self_test_suite() {
  return {check_inv_sqrt_identity(), check_normalization_oracle(), check_coefficient_fidelity(),
          check_projection_recovery(), check_generic_rank(), check_pose_invariance()};
}

/// Consistency checks on a stored solution; `image` enables the fidelity check.
inline std::vector<CheckResult> verify_solution(const CanonicalSolution& sol, const ImageTensors* image,
                                                double radius = 0.3) {
  std::vector<CheckResult> out;
  double r11 = 0.0;
  for (double v : sol.at(1).r1.entries()) r11 = std::max(r11, std::abs(v));
  out.push_back({"first-order r1 is zero", r11 == 0.0, "max |r1^1| " + format_double(r11)});

  double worst = 0.0;
  for (int j = 2; j <= sol.order; ++j)
    worst = std::max(worst, relative_error(normalization_row(sol.rows, j), sol.at(j).r1));
  out.push_back({"r1 rows satisfy the unit-length recursion", worst < 1e-12, "max relative error " + format_double(worst)});

  double generic = 0.0;
  for (const auto& r : sol.rows)
    generic = std::max(generic, relative_error(generic_row(r.r1, r.r2, sol.c1, sol.c2), r.r3));
  const GenericityReport rep = genericity_score(sol);
  out.push_back({"genericity (informational)", true,
                 std::string(generic < 1e-12 ? "r3 = c1 r1 + c2 r2" : "r3 supplied freely") + ", rank " +
                     std::to_string(rep.rank_estimate) + ", detA " + format_double(rep.det_a)});

  if (image != nullptr) {
    if (image->order != sol.order) {
      out.push_back({"image coefficient fidelity", false, "image and solution orders differ"});
    } else {
      const double err = coefficient_fidelity_error(sol, *image);
      out.push_back({"image coefficient fidelity", err < 1e-12, "max abs error " + format_double(err)});
    }
  }
  const ErrorStats eps = epsilon_error(sol, radius);
  out.push_back({"unit-length deviation (informational)", true,
                 "eps max " + format_double(eps.max) + ", rms " + format_double(eps.rms) + " at radius " +
                     format_double(radius)});
  return out;
}

}  // namespace tsfs
