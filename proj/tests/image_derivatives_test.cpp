#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "test_util.hpp"
#include "tsfs/image_derivatives.hpp"

namespace tsfs {
namespace {

const Vec3 kLight(0.48, 0.36, 0.8);

Scene parabolic_cylinder() { return Scene::polynomial({{{2, 0}, -0.5}}); }

ScalarGrid sample(const GridSpec& spec, const std::function<double(double, double)>& f) {
  auto g = spec.make<double>();
  for (int r = 0; r < g.ny; ++r)
    for (int c = 0; c < g.nx; ++c) {
      const auto p = g.position(c, r);
      g.at(c, r) = f(p.x(), p.y());
    }
  return g;
}

TEST(DeriveFromScene, LightParallelToNormalIsDegenerate) {
  EXPECT_THROW(derive_from_scene(Jet2(3), Vec3(0, 0, 1), 2), DegeneracyError);
}

TEST(DeriveFromScene, ParabolicCylinderSymmetry) {
  // I(x) = 0.8 / sqrt(1 + x^2) for light (0, 0.6, 0.8); I'' (0) = -0.8.
  const ImageTensors it = derive_from_scene(parabolic_cylinder(), Vec3(0, 0.6, 0.8), 4);
  EXPECT_DOUBLE_EQ(it.i0, 0.8);
  EXPECT_EQ(it.derivative(1).entry(0, 1), 0.0);
  EXPECT_EQ(it.derivative(1).entry(1, 0), 0.0);
  EXPECT_NEAR(it.derivative(2).entry(2, 0), -0.8, 1e-15);
  EXPECT_EQ(it.derivative(2).entry(1, 1), 0.0);
  EXPECT_EQ(it.derivative(2).entry(0, 2), 0.0);
}

TEST(DeriveFromScene, MatchesFiniteDifferences) {
  const Scene scene = Scene::polynomial({{{1, 0}, 0.2}, {{0, 1}, -0.1}, {{2, 0}, 0.4}, {{1, 1}, 0.3}, {{0, 3}, -0.5}});
  const ImageTensors it = derive_from_scene(scene, kLight, 3);
  auto image = [&](double x, double y) { return kLight.dot(scene.normal(x, y)); };
  const double h = 1e-4;
  EXPECT_NEAR(it.i0, image(0, 0), 1e-15);
  EXPECT_NEAR(it.derivative(1).entry(1, 0), (image(h, 0) - image(-h, 0)) / (2 * h), 1e-7);
  EXPECT_NEAR(it.derivative(1).entry(0, 1), (image(0, h) - image(0, -h)) / (2 * h), 1e-7);
  const double hh = 1e-3;
  EXPECT_NEAR(it.derivative(2).entry(1, 1),
              (image(hh, hh) - image(hh, -hh) - image(-hh, hh) + image(-hh, -hh)) / (4 * hh * hh), 1e-5);
}

TEST(DeriveFromScene, RejectsBadInputs) {
  EXPECT_THROW(derive_from_scene(Jet2(3), Vec3(0, 0, 2), 2), ValidationError);
  EXPECT_THROW(derive_from_scene(Jet2(2), kLight, 2), ValidationError);  // height order too low
  EXPECT_THROW(derive_from_scene(Scene::cylinder(), kLight, 9), ValidationError);
}

TEST(FitFromSamples, RecoversPolynomialCoefficients) {
  std::mt19937_64 rng(21);
  for (int n = 1; n <= 6; ++n) {
    const Jet2 poly = test::random_jet(rng, n);
    const FitResult fit = fit_from_samples(sample({15, 0.4}, [&](double x, double y) { return poly.evaluate(x, y); }), n);
    const auto expected = jets_to_tensors(poly, n);
    EXPECT_NEAR(fit.tensors.i0, expected[0].entry(0, 0), 1e-9);
    for (int j = 1; j <= n; ++j)
      for (int b = 0; b <= j; ++b) {
        const double e = expected[j].entries()[b];
        EXPECT_NEAR(fit.tensors.derivative(j).entries()[b], e, 1e-9 * std::max(1.0, std::abs(e)));
      }
    EXPECT_LT(fit.residual_rms, 1e-12);
    EXPECT_FALSE(fit.ill_conditioned);
  }
}

TEST(FitFromSamples, ConstantImage) {
  const FitResult fit = fit_from_samples(sample({9, 0.3}, [](double, double) { return 0.7; }), 4);
  EXPECT_NEAR(fit.tensors.i0, 0.7, 1e-14);
  for (const auto& t : fit.tensors.tensors)
    for (double v : t.entries()) EXPECT_NEAR(v, 0.0, 1e-10);
}

TEST(FitFromSamples, CylinderResidual) {
  const FitResult fit = fit_from_samples(render_scene(Scene::cylinder(), kLight, {21, 0.3}), 5);
  EXPECT_LT(fit.residual_rms, 1e-3);
}

TEST(FitFromSamples, Underdetermined) {
  EXPECT_THROW(fit_from_samples(ScalarGrid(3, 3, 0.1), 3), ValidationError);  // 10 terms, 9 samples
  EXPECT_THROW(fit_from_samples(ScalarGrid(2, 9, 0.1), 1), ValidationError);
  EXPECT_THROW(fit_from_samples(ScalarGrid(30, 30, 0.1), 9), ValidationError);
}

TEST(FitFromSamples, AgreesWithDeriveOnTaylorImage) {
  for (const Scene& scene : {Scene::cylinder(), Scene::sphere(), parabolic_cylinder()}) {
    for (int n = 1; n <= 5; ++n) {
      const ImageTensors it = derive_from_scene(scene, kLight, n);
      const FitResult fit =
          fit_from_samples(sample({21, 0.3}, [&](double x, double y) { return eval_image_taylor(it, x, y); }), n);
      EXPECT_NEAR(fit.tensors.i0, it.i0, 1e-6);
      for (int j = 1; j <= n; ++j)
        for (int b = 0; b <= j; ++b) EXPECT_NEAR(fit.tensors.derivative(j).entries()[b], it.derivative(j).entries()[b], 1e-6);
    }
  }
}

TEST(FitFromSamples, ConvergesToDerivedTensorsAsPatchShrinks) {
  // The fit absorbs the remainder; its bias on D^j scales like R^(n+1-j).
  const int n = 4;
  const Scene scene = Scene::sphere();
  const ImageTensors it = derive_from_scene(scene, kLight, n);
  auto bias = [&](double radius, int j) {
    const FitResult fit = fit_from_samples(render_scene(scene, kLight, {21, radius}), n);
    double m = 0.0;
    for (int b = 0; b <= j; ++b) m = std::max(m, std::abs(fit.tensors.derivative(j).entries()[b] - it.derivative(j).entries()[b]));
    return m;
  };
  for (int j : {2, 4}) {
    const double ratio = bias(0.2, j) / bias(0.1, j);
    EXPECT_GT(ratio, 0.8 * std::pow(2.0, n + 1 - j)) << "order " << j;
  }
}

TEST(EvalImageTaylor, HandValues) {
  ImageTensors it;
  it.order = 2;
  it.i0 = 0.3;
  it.tensors = {test::scalar_tensor({2.0, 0.0}), ScalarTensor(2)};
  EXPECT_EQ(eval_image_taylor(it, 0.0, 0.0), 0.3);
  EXPECT_NEAR(eval_image_taylor(it, 0.5, 0.3), 1.3, 1e-15);
  it.tensors[0] = ScalarTensor(1);
  it.tensors[1].entry(1, 1) = 4.0;
  // (1/2!) * C(2,1) * x y * 4 at (0.5, 0.5)
  EXPECT_NEAR(eval_image_taylor(it, 0.5, 0.5), 1.3, 1e-15);
}

TEST(EvalImageTaylor, ReproducesJetValues) {
  std::mt19937_64 rng(22);
  const Jet2 poly = test::random_jet(rng, 6);
  const auto t = jets_to_tensors(poly, 6);
  ImageTensors it;
  it.order = 6;
  it.i0 = t[0].entry(0, 0);
  it.tensors.assign(t.begin() + 1, t.end());
  for (double x : {-0.4, 0.0, 0.25})
    for (double y : {-0.3, 0.1}) EXPECT_NEAR(eval_image_taylor(it, x, y), poly.evaluate(x, y), 1e-14);
}

TEST(DeltaError, ZeroOnTaylorPolynomial) {
  const ImageTensors it = derive_from_scene(Scene::sphere(), kLight, 4);
  const ScalarGrid truth = sample({17, 0.3}, [&](double x, double y) { return eval_image_taylor(it, x, y); });
  EXPECT_LT(delta_error(it, truth).max, 1e-12);
}

TEST(DeltaError, CylinderWithinBudget) {
  const ImageTensors it = derive_from_scene(Scene::cylinder(), kLight, 5);
  const ErrorStats d = delta_error(it, render_scene(Scene::cylinder(), kLight, {65, 0.3}));
  EXPECT_LE(d.max, 0.05);
  EXPECT_LE(d.rms, d.max);
}

TEST(DeltaError, RemainderOrderScaling) {
  const int n = 5;
  const ImageTensors it = derive_from_scene(Scene::cylinder(), kLight, n);
  const double big = delta_error(it, render_scene(Scene::cylinder(), kLight, {65, 0.3})).max;
  const double small = delta_error(it, render_scene(Scene::cylinder(), kLight, {65, 0.15})).max;
  EXPECT_GE(big / small, std::pow(2.0, n + 1) / 2.0);
}

TEST(DeltaError, NonIncreasingWithOrder) {
  for (const Scene& scene : {Scene::cylinder(), Scene::sphere()}) {
    const ScalarGrid truth = render_scene(scene, kLight, {33, 0.3});
    double previous = INFINITY;
    for (int n = 1; n <= 8; ++n) {
      const double d = delta_error(derive_from_scene(scene, kLight, n), truth).max;
      EXPECT_LE(d, previous * (1.0 + 1e-9)) << "order " << n;
      previous = d;
    }
  }
}

TEST(GridFile, RoundTripIsExact) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1, 1);
  ScalarGrid g(4, 3, 0.123456789);
  for (double& v : g.values) v = u(rng);
  std::stringstream ss;
  write_grid(ss, g);
  const ScalarGrid back = read_grid<double>(ss);
  EXPECT_EQ(back.nx, 4);
  EXPECT_EQ(back.ny, 3);
  EXPECT_EQ(back.spacing, g.spacing);
  EXPECT_EQ(back.values, g.values);

  VectorGrid n(2, 2, 1.0);
  n.at(1, 1) = Vec3(0.1, 0.2, 0.3);
  std::stringstream vs;
  write_grid(vs, n);
  EXPECT_EQ(read_grid<Vec3>(vs).at(1, 1), Vec3(0.1, 0.2, 0.3));
}

TEST(GridFile, MalformedInputs) {
  std::stringstream short_data("3 3 0.1\n1 2 3\n");
  EXPECT_THROW(read_grid<double>(short_data), ValidationError);
  std::stringstream bad_header("3 x 0.1\n");
  EXPECT_THROW(read_grid<double>(bad_header), ValidationError);
  std::stringstream bad_value("2 2 0.1\n1 2 three 4\n");
  EXPECT_THROW(read_grid<double>(bad_value), ValidationError);
  std::stringstream bad_spacing("2 2 0\n1 2 3 4\n");
  EXPECT_THROW(read_grid<double>(bad_spacing), ValidationError);
}

}  // namespace
}  // namespace tsfs
