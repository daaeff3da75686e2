// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Usage: acceptance [scratch-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsfs/cli.hpp"
#include "tsfs/tsfs.hpp"

namespace fs = std::filesystem;
using namespace tsfs;

namespace {

const Vec3 kLight(0.48, 0.36, 0.8);

struct Outcome {
  bool passed;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // <= 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ScalarTensor jet_projection_tensor(const VecJet2& n, const Vec3& n0, int j) {
  const Jet2 projected = n[0] * n0.x() + n[1] * n0.y() + n[2] * n0.z();
  ScalarTensor t(j);
  for (int b = 0; b <= j; ++b) t.entry(j - b, b) = projected.coeff(j - b, b) * factorial(j - b) * factorial(b);
  return t;
}

Outcome normalization_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> degree(2, 6);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const VecJet2 n = height_to_normal_jets(random_height(rng, degree(rng), 7));
    const auto dn = jets_to_tensors(n, 6);
    const Vec3 n0 = dn[0].entry(0, 0);
    std::vector<UnfoldedRows> lower;
    for (int j = 1; j <= 6; ++j) {
      const ScalarTensor got = normalization_row(lower, j);
      worst = std::max(worst, relative_error(got, jet_projection_tensor(n, n0, j)));
      lower.push_back(UnfoldedRows::from_columns(dn[j]));
    }
  }
  return {worst < 1e-9, "max relative error " + fmt(worst)};
}

Outcome coefficient_fidelity() {
  const ImageTensors it = derive_from_scene(Scene::cylinder(), kLight, 5);
  const double s = std::sqrt(1.0 - it.i0 * it.i0);
  double worst = 0.0;
  for (double c1 : linear_range(-1.0, 1.0, 5))
    for (double c2 : linear_range(-1.0, 1.0, 5)) {
      const CanonicalSolution sol = solve_generic(it, c1, c2);
      for (int j = 1; j <= 5; ++j) {
        const ScalarTensor rendered = it.i0 * sol.at(j).r1 + s * sol.at(j).r2;
        for (int b = 0; b <= j; ++b)
          worst = std::max(worst, std::abs(rendered.entries()[b] - it.derivative(j).entries()[b]));
      }
    }
  return {worst < 1e-12, "25 solutions, max abs error " + fmt(worst)};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

Outcome family_sweep(const fs::path& dir) {
  fs::remove_all(dir);
  std::ostringstream out, err;
  const int status = cli::run_command({"tsfs", "sweep", "--scene", "cylinder", "--order", "5", "--diagonal", "0:1:5",
                                       "--radius", "0.3", "--poses", "default", "--out", dir.string()},
                                      out, err);
  if (status != 0) return {false, "sweep exited " + std::to_string(status) + ": " + err.str()};
  std::set<std::string> meshes;
  for (int i = 0; i < 5; ++i) {
    const fs::path obj = dir / (cell_name(i) + ".obj");
    if (!fs::exists(obj)) return {false, obj.filename().string() + " missing"};
    meshes.insert(slurp(obj));
  }
  std::stringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  const auto header = split(line, ',');
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  double eps = 0.0, delta = 0.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto f = split(line, ',');
    eps = std::max(eps, std::stod(f.at(col("eps_max"))));
    delta = std::max(delta, std::stod(f.at(col("delta_max"))));
    ++rows;
  }
  const bool ok = rows == 5 && meshes.size() == 5 && eps <= 0.05 && delta <= 0.05;
  return {ok, std::to_string(meshes.size()) + " distinct meshes, " + std::to_string(rows) + " rows, max eps " +
                  fmt(eps) + ", max delta " + fmt(delta)};
}

std::vector<ScalarTensor> random_rows(std::mt19937_64& rng, int order) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ScalarTensor> rows;
  for (int j = 1; j <= order; ++j) {
    ScalarTensor r(j);
    for (int b = 0; b <= j; ++b) r.entry(j - b, b) = u(rng);
    rows.push_back(r);
  }
  return rows;
}

Outcome genericity_separation() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  int generic_rank2 = 0, random_rank3 = 0;
  for (int t = 0; t < 100; ++t) {
    const Jet2 f = random_height(rng, 5, 6);
    const Vec3 n0 = height_to_normal_jets(f).evaluate(0, 0);
    const ImageTensors it = derive_from_scene(f, random_light(rng, n0), 5);
    const GenericityReport g = genericity_score(solve_generic(it, c(rng), c(rng)), it);
    if (g.rank_estimate == 2 && g.singular_values(2) < 1e-8 * g.singular_values(0)) ++generic_rank2;
    if (genericity_score(solve_with_rows(it, random_rows(rng, 5)), it).rank_estimate == 3) ++random_rank3;
  }
  return {generic_rank2 == 100 && random_rank3 >= 95, "generic rank 2: " + std::to_string(generic_rank2) +
                                                          "/100, random rows rank 3: " + std::to_string(random_rank3) +
                                                          "/100"};
}

Outcome pose_invariance() {
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  const CanonicalSolution sol = solve_generic(derive_from_scene(Scene::cylinder(), kLight, 5), 0.5, 0.5);
  std::vector<ScalarGrid> images;
  for (int p = 0; p < 20; ++p) {
    const ScenePose pose = pose_from_angles(angle(rng), angle(rng), angle(rng));
    images.push_back(render_lambertian(world_normal_field(sol, pose, {65, 0.3}), pose.world_light(sol.i0)));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < images.size(); ++a)
    for (std::size_t b = a + 1; b < images.size(); ++b)
      for (std::size_t i = 0; i < images[a].size(); ++i)
        worst = std::max(worst, std::abs(images[a].values[i] - images[b].values[i]));
  return {worst <= 1e-12, "20 poses, max pairwise difference " + fmt(worst)};
}

Outcome projection_recovery() {
  double worst = 0.0;
  const std::vector<Vec3> lights{kLight, Vec3(0.6, 0.0, 0.8), Vec3(-0.3, 0.5, 0.6).normalized()};
  for (const Scene& scene : {Scene::sphere(1.0), Scene::cylinder(1.0)}) {
    const VecJet2 normal = height_to_normal_jets(scene.height_jet(6));
    const auto dn = jets_to_tensors(normal, 5);
    const Vec3 n0 = dn[0].entry(0, 0);
    for (const Vec3& light : lights) {
      const ScenePose frame = pose_from_scene(n0, light);
      const auto truth = true_canonical_rows(dn, frame);
      std::vector<ScalarTensor> third;
      for (const auto& r : truth) third.push_back(r.r3);
      const CanonicalSolution sol = solve_with_rows(derive_from_scene(scene, light, 5), third);
      for (int j = 1; j <= 5; ++j) {
        worst = std::max(worst, relative_error(sol.at(j).r1, truth[j - 1].r1));
        worst = std::max(worst, relative_error(sol.at(j).r2, truth[j - 1].r2));
      }
    }
  }
  return {worst < 1e-9, "sphere and cylinder, 3 lights, max relative error " + fmt(worst)};
}

Outcome integration_fidelity() {
  const Scene sphere = Scene::sphere(1.0);
  NormalGrid normals;
  normals.field = GridSpec{64, 0.3}.make<Vec3>();
  normals.renormalized = true;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      const auto p = normals.field.position(c, r);
      normals.field.at(c, r) = sphere.normal(p.x(), p.y());
    }
  const IntegrationResult res = integrate_heights(normals);
  double sq = 0.0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      const auto p = res.heights.position(c, r);
      const double e = res.heights.at(c, r) - sphere.height(p.x(), p.y());
      sq += e * e;
    }
  const double rms = std::sqrt(sq / (64.0 * 64.0));
  return {rms < 1e-3 && res.curl_residual < 1e-8, "height RMS " + fmt(rms) + ", curl " + fmt(res.curl_residual)};
}

Outcome determinism(const fs::path& first, const fs::path& second) {
  const Outcome rerun = family_sweep(second);
  if (!rerun.passed) return {false, "rerun failed: " + rerun.detail};
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(first)) {
    const fs::path other = second / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
      return {false, entry.path().filename().string() + " differs"};
    ++compared;
  }
  int second_count = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(second)) ++second_count;
  if (second_count != compared) return {false, "file sets differ"};
  return {true, std::to_string(compared) + " files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path scratch = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "tsfs_acceptance";
  fs::create_directories(scratch);
  const fs::path run1 = scratch / "sweep_run1", run2 = scratch / "sweep_run2";

  const std::vector<Criterion> criteria{
      {1, "normalization rows match jet inner products", 10.0, normalization_oracle},
      {2, "coefficient fidelity over a 5x5 (c1, c2) grid", 1.0, coefficient_fidelity},
      {3, "cylinder family sweep: distinct meshes, eps and delta <= 0.05", 5.0, [&] { return family_sweep(run1); }},
      {4, "generic rank 2 vs random third rows rank 3", 30.0, genericity_separation},
      {5, "rendered image independent of pose", 5.0, pose_invariance},
      {6, "r1, r2 equal true projected derivatives", 2.0, projection_recovery},
      {7, "sphere normals integrate to the analytic height", 2.0, integration_fidelity},
      {8, "repeated sweep is byte-identical", 0.0, [&] { return determinism(run1, run2); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool ok = o.passed;
    std::string timing = fmt(seconds) + " s";
    if (c.budget_seconds > 0.0) {
      timing += " of " + fmt(c.budget_seconds) + " s";
      if (seconds >= c.budget_seconds) ok = false;
    }
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " [" << o.detail << "; "
              << timing << "]" << std::endl;
    if (!ok) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
