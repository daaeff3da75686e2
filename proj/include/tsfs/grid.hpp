#pragma once

// Regular 2-D sample grids (images, height fields, normal fields) and the
// plain-text float grid format:
//
//   nx ny spacing
//   v v v ...        (nx*ny scalars, or 3*nx*ny for vector grids, row-major)

#include <Eigen/Core>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs {

template <typename Value>
struct PatchGrid {
  int nx = 0;
  int ny = 0;
  double spacing = 1.0;
  std::vector<Value> values;  // row-major: index = row * nx + col

  PatchGrid() = default;
  PatchGrid(int nx_, int ny_, double spacing_) : nx(nx_), ny(ny_), spacing(spacing_) {
    if (nx < 2 || ny < 2) throw ValidationError("grid must be at least 2x2");
    if (!(spacing > 0.0)) throw ValidationError("grid spacing must be positive");
    values.assign(static_cast<std::size_t>(nx) * ny, zero_value<Value>());
  }

  double center_col() const { return (nx - 1) / 2.0; }
  double center_row() const { return (ny - 1) / 2.0; }

  /// Physical position of a sample relative to the patch center; x runs along
  /// columns and y along rows.
  Eigen::Vector2d position(int col, int row) const {
    return {(col - center_col()) * spacing, (row - center_row()) * spacing};
  }

  Value& at(int col, int row) { return values[static_cast<std::size_t>(row) * nx + col]; }
  const Value& at(int col, int row) const { return values[static_cast<std::size_t>(row) * nx + col]; }

  std::size_t size() const { return values.size(); }

  /// Largest distance from the center to any sample.
  double max_radius() const { return spacing * std::hypot(center_col(), center_row()); }
};

using ScalarGrid = PatchGrid<double>;
using VectorGrid = PatchGrid<Vec3>;

/// A square sampling of [-radius, radius]^2 with `samples` points per side.
struct GridSpec {
  int samples = 65;
  double radius = 0.3;

  template <typename Value>
  PatchGrid<Value> make() const {
    if (samples < 2) throw ValidationError("grid: need at least 2 samples per side");
    if (!(radius > 0.0)) throw ValidationError("grid: radius must be positive");
    return PatchGrid<Value>(samples, samples, 2.0 * radius / (samples - 1));
  }
};

/// Interpolated value at the patch center (bilinear for even dimensions).
inline double center_value(const ScalarGrid& g) {
  const int c0 = static_cast<int>(std::floor(g.center_col()));
  const int r0 = static_cast<int>(std::floor(g.center_row()));
  const int c1 = static_cast<int>(std::ceil(g.center_col()));
  const int r1 = static_cast<int>(std::ceil(g.center_row()));
  return 0.25 * (g.at(c0, r0) + g.at(c1, r0) + g.at(c0, r1) + g.at(c1, r1));
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename Value>
void write_grid(std::ostream& os, const PatchGrid<Value>& g) {
  os << g.nx << ' ' << g.ny << ' ' << format_double(g.spacing) << '\n';
  for (int row = 0; row < g.ny; ++row) {
    for (int col = 0; col < g.nx; ++col) {
      if (col > 0) os << ' ';
      if constexpr (std::is_same_v<Value, double>) {
        os << format_double(g.at(col, row));
      } else {
        const Vec3& v = g.at(col, row);
        os << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z());
      }
    }
    os << '\n';
  }
}

template <typename Value>
void write_grid_file(const std::string& path, const PatchGrid<Value>& g) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open '" + path + "' for writing");
  write_grid(os, g);
}

template <typename Value>
PatchGrid<Value> read_grid(std::istream& is, const std::string& origin = "grid") {
  constexpr int dim = std::is_same_v<Value, double> ? 1 : 3;
  std::string header;
  if (!std::getline(is, header)) throw ValidationError(origin + ": missing header line 'nx ny spacing'");
  std::istringstream hs(header);
  int nx = 0, ny = 0;
  double spacing = 0.0;
  if (!(hs >> nx >> ny >> spacing)) throw ValidationError(origin + ": header must be 'nx ny spacing'");
  if (nx < 2 || ny < 2) throw ValidationError(origin + ": nx and ny must be >= 2");
  if (!(spacing > 0.0)) throw ValidationError(origin + ": spacing must be positive");
  std::vector<double> raw;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      raw.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError(origin + ": value '" + tok + "' is not a number");
    }
  }
  const std::size_t expected = static_cast<std::size_t>(nx) * ny * dim;
  if (raw.size() != expected) {
    throw ValidationError(origin + ": expected " + std::to_string(expected) + " values, found " +
                          std::to_string(raw.size()));
  }
  PatchGrid<Value> g(nx, ny, spacing);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if constexpr (dim == 1) {
      g.values[i] = raw[i];
    } else {
      g.values[i] = Vec3(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
    }
  }
  return g;
}

template <typename Value>
PatchGrid<Value> read_grid_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open grid file '" + path + "'");
  return read_grid<Value>(is, path);
}

}  // namespace tsfs
