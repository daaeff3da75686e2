#pragma once

// Command-line front end. Exit status: 0 success, 1 validation error,
// 2 numerical degeneracy.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/genericity.hpp"
#include "tsfs/grid.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/io.hpp"
#include "tsfs/reconstruction.hpp"
#include "tsfs/selftest.hpp"
#include "tsfs/sweep.hpp"

namespace tsfs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitDegenerate = 2;

inline const char* kDefaultLight = "0.48,0.36,0.8";

inline nlohmann::json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

inline nlohmann::json report_to_json(const GenericityReport& r) {
  return {{"detA", r.det_a},
          {"normalized_det", r.normalized_det},
          {"log_genericity", finite_or_string(r.log_genericity)},
          {"rank_estimate", r.rank_estimate},
          {"singular_values", {r.singular_values(0), r.singular_values(1), r.singular_values(2)}},
          {"fidelity", r.fidelity},
          {"posterior_score", finite_or_string(r.posterior_score)},
          {"sigma", r.sigma},
          {"A_is_gram_matrix", r.gram_simplification}};
}

inline std::vector<PoseAngles> parse_poses(const std::string& text) {
  if (text == "default") return {PoseAngles{}};
  if (text == "fig") return {PoseAngles{0.0, 0.0, 0.0}, PoseAngles{0.3, 0.0, 0.6}, PoseAngles{0.3, std::numbers::pi, -0.6}};
  std::vector<PoseAngles> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const Vec3 a = io::parse_vec3(item, "--poses");
    out.push_back({a.x(), a.y(), a.z()});
  }
  if (out.empty()) throw ValidationError("--poses: no poses given");
  return out;
}

inline ScenePose parse_pose(const std::string& text) {
  const Vec3 a = io::parse_vec3(text, "--pose");
  return pose_from_angles(a.x(), a.y(), a.z());
}

inline Vec3 parse_light(const std::string& text) {
  const Vec3 l = io::parse_vec3(text, "--light");
  if (!(l.norm() > 0.0)) throw ValidationError("--light: zero vector");
  return l.normalized();
}

inline void check_order(int order) {
  if (order < 1 || order > kMaxImageOrder) throw ValidationError("--order: must be in [1, 8]");
}

inline GridSpec make_grid_spec(int samples, double radius) {
  if (samples < 2) throw ValidationError("--grid: need at least 2 samples");
  if (!(radius > 0.0)) throw ValidationError("--radius: must be positive");
  return {samples, radius};
}

/// Runs the CLI on argv-style arguments (args[0] is the program name).
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Generic Taylor normal fields consistent with a Lambertian image patch", "tsfs"};
  app.require_subcommand(1);

  std::string scene = "cylinder", light = kDefaultLight, in, out_path, obj_path, rows_path, image_path, pose = "0,0,0";
  std::string diagonal, c1_text, c2_text, poses = "default";
  int order = 5, grid = 65;
  double c1 = 0.0, c2 = 0.0, radius = 0.3, sigma = 0.01;
  bool include_zeroth = false, no_renormalize = false, self_test = false;

  auto* derive = app.add_subcommand("derive", "Image derivative tensors from a scene or a sampled grid");
  derive->add_option("--scene", scene, "cylinder[:R] | sphere[:R] | poly:a,b=c;...");
  derive->add_option("--light", light, "Light direction x,y,z");
  derive->add_option("--in", in, "Sampled image grid (fits instead of using --scene)");
  derive->add_option("--order", order, "Taylor order");
  derive->add_option("--out", out_path, "Image tensors JSON")->required();

  auto* solve = app.add_subcommand("solve", "Solve for a canonical-frame Taylor normal field");
  solve->add_option("--in", in, "Image tensors JSON")->required();
  solve->add_option("--c1", c1, "Generic constant c1");
  solve->add_option("--c2", c2, "Generic constant c2");
  solve->add_option("--rows", rows_path, "Third rows (tensor exchange JSON, value_dim 1) replacing c1, c2");
  solve->add_option("--sigma", sigma, "Observation noise for the posterior score");
  solve->add_flag("--include-zeroth-beta", include_zeroth, "Prepend the D^0 N column to beta");
  solve->add_option("--out", out_path, "Solution JSON")->required();

  auto* render = app.add_subcommand("render", "Render a solution under a pose");
  auto* integrate = app.add_subcommand("integrate", "Integrate a solution's normals to heights and a mesh");
  for (auto* sub : {render, integrate}) {
    sub->add_option("--in", in, "Solution JSON")->required();
    sub->add_option("--pose", pose, "slant,tilt,spin in radians");
    sub->add_option("--grid", grid, "Samples per side");
    sub->add_option("--radius", radius, "Patch half-width");
    sub->add_flag("--no-renormalize", no_renormalize, "Keep the raw Taylor normals");
    sub->add_option("--out", out_path, "Output float grid")->required();
  }
  integrate->add_option("--obj", obj_path, "Mesh path (default: <out>.obj)");

  auto* sweep = app.add_subcommand("sweep", "Sweep generic constants and poses");
  sweep->add_option("--scene", scene, "cylinder[:R] | sphere[:R] | poly:a,b=c;...");
  sweep->add_option("--light", light, "Light direction x,y,z");
  sweep->add_option("--in", in, "Sampled image grid (fits instead of using --scene)");
  sweep->add_option("--order", order, "Taylor order");
  sweep->add_option("--diagonal", diagonal, "c1 = c2 over lo:hi:steps");
  sweep->add_option("--c1", c1_text, "c1 value or lo:hi:steps");
  sweep->add_option("--c2", c2_text, "c2 value or lo:hi:steps");
  sweep->add_option("--poses", poses, "default | fig | s,t,p;s,t,p;...");
  sweep->add_option("--grid", grid, "Samples per side");
  sweep->add_option("--radius", radius, "Patch half-width");
  sweep->add_option("--sigma", sigma, "Observation noise for the posterior score");
  sweep->add_flag("--include-zeroth-beta", include_zeroth, "Prepend the D^0 N column to beta");
  sweep->add_flag("--no-renormalize", no_renormalize, "Keep the raw Taylor normals");
  sweep->add_option("--out", out_path, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Check invariants");
  verify->add_flag("--self-test", self_test, "Run the randomized oracle suite");
  verify->add_option("--in", in, "Solution JSON to check");
  verify->add_option("--image", image_path, "Image tensors the solution came from");
  verify->add_option("--radius", radius, "Radius for the unit-length statistic");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    auto load_input_image = [&](const Vec3& l) -> std::pair<ImageTensors, std::optional<ScalarGrid>> {
      check_order(order);
      if (!in.empty()) {
        ScalarGrid g = read_grid_file<double>(in);
        FitResult fit = fit_from_samples(g, order);
        out << "fit residual_rms " << format_double(fit.residual_rms) << " condition "
            << format_double(fit.condition_number) << (fit.ill_conditioned ? " (warning: ill-conditioned)" : "")
            << '\n';
        return {std::move(fit.tensors), std::move(g)};
      }
      return {derive_from_scene(io::parse_scene(scene), l, order), std::nullopt};
    };

    if (*derive) {
      const auto [it, grid_in] = load_input_image(parse_light(light));
      io::write_json_file(out_path, io::image_tensors_to_json(it));
      out << "i0 " << format_double(it.i0) << '\n';
      return kExitOk;
    }

    if (*solve) {
      const ImageTensors it = io::image_tensors_from_json(io::read_json_file(in), in);
      CanonicalSolution sol;
      if (!rows_path.empty()) {
        const auto third = io::tensors_from_json<double>(io::read_json_file(rows_path), rows_path);
        sol = solve_with_rows(it, third);
      } else {
        sol = solve_generic(it, c1, c2);
      }
      io::write_json_file(out_path, io::solution_to_json(sol));
      out << report_to_json(genericity_score(sol, it, {sigma, include_zeroth})).dump(2) << '\n';
      return kExitOk;
    }

    if (*render || *integrate) {
      const CanonicalSolution sol = io::solution_from_json(io::read_json_file(in), in);
      const ScenePose p = parse_pose(pose);
      const NormalGrid normals = world_normal_field(sol, p, make_grid_spec(grid, radius), !no_renormalize);
      if (*render) {
        const ScalarGrid img = render_lambertian(normals, p.world_light(sol.i0));
        write_grid_file(out_path, img);
        out << "shadow_count " << shadow_count(img) << (normals.visible ? "" : " (some normals face away)") << '\n';
        return kExitOk;
      }
      const IntegrationResult ir = integrate_heights(normals);
      write_grid_file(out_path, ir.heights);
      std::ofstream os(obj_path.empty() ? out_path + ".obj" : obj_path);
      if (!os) throw ValidationError("cannot write mesh file");
      write_obj(os, export_mesh(ir.heights));
      out << "curl_residual " << format_double(ir.curl_residual) << "\ngradient_residual "
          << format_double(ir.gradient_residual) << '\n';
      return kExitOk;
    }

    if (*sweep) {
      SweepSpec spec;
      spec.order = order;
      spec.grid = make_grid_spec(grid, radius);
      spec.sigma = sigma;
      spec.renormalize = !no_renormalize;
      spec.include_zeroth = include_zeroth;
      spec.poses = parse_poses(poses);
      if (!diagonal.empty()) {
        if (!c1_text.empty() || !c2_text.empty()) throw ValidationError("--diagonal: cannot be combined with --c1/--c2");
        spec.c1_values = spec.c2_values = parse_range(diagonal, "--diagonal");
        spec.diagonal = true;
      } else if (!c1_text.empty() || !c2_text.empty()) {
        spec.c1_values = parse_range(c1_text.empty() ? "0" : c1_text, "--c1");
        spec.c2_values = parse_range(c2_text.empty() ? "0" : c2_text, "--c2");
        spec.diagonal = false;
      }
      const Vec3 l = parse_light(light);
      const auto [it, grid_in] = load_input_image(l);
      const ScalarGrid truth = grid_in ? *grid_in : render_scene(io::parse_scene(scene), l, spec.grid);
      const auto rows = run_sweep(spec, it, truth);
      write_sweep(out_path, rows);
      out << "wrote " << rows.size() << " cells to " << out_path << '\n';
      return kExitOk;
    }

    if (*verify) {
      std::vector<CheckResult> results;
      if (self_test) {
        results = self_test_suite();
      } else if (!in.empty()) {
        const CanonicalSolution sol = io::solution_from_json(io::read_json_file(in), in);
        std::optional<ImageTensors> image;
        if (!image_path.empty()) image = io::image_tensors_from_json(io::read_json_file(image_path), image_path);
        results = verify_solution(sol, image ? &*image : nullptr, radius);
      } else {
        throw ValidationError("verify: pass --self-test or --in <solution>");
      }
      bool all = true;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        all = all && r.passed;
      }
      return all ? kExitOk : kExitValidation;
    }
  } catch (const DegeneracyError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace tsfs::cli
