#pragma once

// Parameter sweeps over (c1, c2) and scene poses: every cell solves, renders,
// integrates and meshes independently; the CSV is assembled afterwards in a
// fixed lexicographic order.

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/genericity.hpp"
#include "tsfs/grid.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/reconstruction.hpp"

namespace tsfs {

struct PoseAngles {
  double slant = 0.0;
  double tilt = 0.0;
  double spin = 0.0;
};

/// lo:hi:steps -> steps evenly spaced values (just lo when steps == 1).
inline std::vector<double> linear_range(double lo, double hi, int steps) {
  if (steps < 1) throw ValidationError("range: step count must be >= 1");
  std::vector<double> v;
  for (int i = 0; i < steps; ++i) v.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
  return v;
}

inline std::vector<double> parse_range(const std::string& text, const std::string& flag) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  try {
    if (parts.size() == 1) return {std::stod(parts[0])};
    if (parts.size() != 3) throw std::invalid_argument(text);
    return linear_range(std::stod(parts[0]), std::stod(parts[1]), std::stoi(parts[2]));
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError(flag + ": '" + text + "' must be a number or lo:hi:steps");
  }
}

struct SweepSpec {
  std::vector<double> c1_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> c2_values{0.0, 0.25, 0.5, 0.75, 1.0};
  /// Tie c2 to c1 (cells are c1_values[i] == c2_values[i]).
  bool diagonal = true;
  std::vector<PoseAngles> poses{PoseAngles{}};
  int order = 5;
  GridSpec grid{65, 0.3};
  double sigma = 0.01;
  bool renormalize = true;
  bool include_zeroth = false;

  void validate() const {
    if (c1_values.empty() || c2_values.empty()) throw ValidationError("sweep: empty c1/c2 range");
    if (diagonal && c1_values.size() != c2_values.size())
      throw ValidationError("sweep: diagonal sweep needs equal c1 and c2 step counts");
    if (poses.empty()) throw ValidationError("sweep: no poses");
    if (order < 1 || order > kMaxImageOrder) throw ValidationError("sweep: order must be in [1, 8]");
    if (!(grid.radius > 0.0)) throw ValidationError("sweep: radius must be positive");
    if (grid.samples < 2) throw ValidationError("sweep: grid must have >= 2 samples");
    if (!(sigma > 0.0)) throw ValidationError("sweep: sigma must be positive");
  }
};

struct SweepRow {
  double c1 = 0.0, c2 = 0.0;
  PoseAngles pose;
  double eps_max = 0.0;
  double delta_max = 0.0;
  double det_a = 0.0;
  int rank = 0;
  double curl_residual = std::numeric_limits<double>::quiet_NaN();
  std::size_t shadow_count = 0;
  std::optional<Mesh> mesh;  // absent when some normal faces away from the viewer
  ScalarGrid image;
  ScalarGrid heights;

  auto key() const { return std::make_tuple(c1, c2, pose.slant, pose.tilt, pose.spin); }
};

/// Runs every cell of the sweep. `truth` is the image the tensors describe,
/// sampled on any grid centered on the patch; it drives the delta statistic.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ImageTensors& it, const ScalarGrid& truth) {
  spec.validate();
  if (it.order != spec.order) throw ValidationError("sweep: image tensors have the wrong order");
  const double delta_max = delta_error(it, truth).max;

  std::vector<std::tuple<double, double, PoseAngles>> cells;
  for (std::size_t i = 0; i < spec.c1_values.size(); ++i) {
    if (spec.diagonal) {
      for (const auto& pose : spec.poses) cells.emplace_back(spec.c1_values[i], spec.c2_values[i], pose);
    } else {
      for (double c2 : spec.c2_values)
        for (const auto& pose : spec.poses) cells.emplace_back(spec.c1_values[i], c2, pose);
    }
  }

  auto run_cell = [&](double c1, double c2, PoseAngles angles) {
    SweepRow row;
    row.c1 = c1;
    row.c2 = c2;
    row.pose = angles;
    const CanonicalSolution sol = solve_generic(it, c1, c2);
    const GenericityReport rep = genericity_score(sol, it, {spec.sigma, spec.include_zeroth});
    row.det_a = rep.det_a;
    row.rank = rep.rank_estimate;
    row.eps_max = epsilon_error(sol, spec.grid.radius).max;
    row.delta_max = delta_max;
    const ScenePose pose = pose_from_angles(angles.slant, angles.tilt, angles.spin);
    const NormalGrid normals = world_normal_field(sol, pose, spec.grid, spec.renormalize);
    row.image = render_lambertian(normals, pose.world_light(sol.i0));
    row.shadow_count = shadow_count(row.image);
    if (normals.visible) {
      IntegrationResult ir = integrate_heights(normals);
      row.curl_residual = ir.curl_residual;
      row.mesh = export_mesh(ir.heights);
      row.heights = std::move(ir.heights);
    }
    return row;
  };

  std::vector<std::future<SweepRow>> futures;
  for (const auto& [c1, c2, pose] : cells) futures.push_back(std::async(std::launch::async, run_cell, c1, c2, pose));
  std::vector<SweepRow> rows;
  for (auto& f : futures) rows.push_back(f.get());
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.key() < b.key(); });
  return rows;
}

inline constexpr const char* kSweepCsvHeader =
    "c1,c2,slant,tilt,spin,eps_max,delta_max,detA,rank,curl_residual,shadow_count";

inline std::string sweep_report(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw ValidationError("sweep_report: no results");
  std::ostringstream os;
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_double(r.c1) << ',' << format_double(r.c2) << ',' << format_double(r.pose.slant) << ','
       << format_double(r.pose.tilt) << ',' << format_double(r.pose.spin) << ',' << format_double(r.eps_max) << ','
       << format_double(r.delta_max) << ',' << format_double(r.det_a) << ',' << r.rank << ','
       << format_double(r.curl_residual) << ',' << r.shadow_count << '\n';
  }
  return os.str();
}

inline std::string cell_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cell_%03zu", index);
  return buf;
}

/// Writes sweep.csv plus, per cell (in CSV row order), cell_NNN.obj (when the
/// field is visible) and cell_NNN_image.txt. Meshes are written concurrently,
/// each to its own path.
inline void write_sweep(const std::filesystem::path& dir, const std::vector<SweepRow>& rows) {
  std::filesystem::create_directories(dir);
  std::vector<std::future<void>> writes;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    writes.push_back(std::async(std::launch::async, [&, i] {
      const std::string base = (dir / cell_name(i)).string();
      write_grid_file(base + "_image.txt", rows[i].image);
      if (rows[i].mesh) {
        std::ofstream os(base + ".obj");
        if (!os) throw ValidationError("cannot write '" + base + ".obj'");
        write_obj(os, *rows[i].mesh);
      }
    }));
  }
  for (auto& w : writes) w.get();
  std::ofstream csv(dir / "sweep.csv");
  if (!csv) throw ValidationError("cannot write sweep.csv in '" + dir.string() + "'");
  csv << sweep_report(rows);
}

}  // namespace tsfs
