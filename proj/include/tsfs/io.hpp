#pragma once

// File formats: the tensor exchange JSON (also used for image tensors and
// user-supplied third rows), the canonical solution JSON, and small text
// parsers for command-line values.

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tsfs/errors.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/tensor.hpp"

namespace tsfs::io {

using nlohmann::json;

inline std::string multi_index_key(int a, int b) { return std::to_string(a) + "," + std::to_string(b); }

inline std::pair<int, int> parse_multi_index(const std::string& key) {
  const auto comma = key.find(',');
  try {
    if (comma == std::string::npos) throw std::invalid_argument(key);
    std::size_t ua = 0, ub = 0;
    const int a = std::stoi(key.substr(0, comma), &ua);
    const int b = std::stoi(key.substr(comma + 1), &ub);
    if (ua != comma || ub != key.size() - comma - 1 || a < 0 || b < 0) throw std::invalid_argument(key);
    return {a, b};
  } catch (const std::exception&) {
    throw ValidationError("entries: key '" + key + "' is not a multi-index \"a,b\"");
  }
}

inline double number_field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name) || !j.at(name).is_number())
    throw ValidationError(where + ": field '" + name + "' missing or not a number");
  return j.at(name).get<double>();
}

inline int int_field(const json& j, const char* name, const std::string& where) {
  if (!j.contains(name) || !j.at(name).is_number_integer())
    throw ValidationError(where + ": field '" + name + "' missing or not an integer");
  return j.at(name).get<int>();
}

inline json entries_to_json(const ScalarTensor& t) {
  json e = json::object();
  for (int b = 0; b <= t.order(); ++b) e[multi_index_key(t.order() - b, b)] = t.entry(t.order() - b, b);
  return e;
}

inline json entries_to_json(const VecTensor& t) {
  json e = json::object();
  for (int b = 0; b <= t.order(); ++b) {
    const Vec3& v = t.entry(t.order() - b, b);
    e[multi_index_key(t.order() - b, b)] = {v.x(), v.y(), v.z()};
  }
  return e;
}

template <typename Value>
DerivTensor<Value> tensor_from_entries(const json& entries, int j, const std::string& where) {
  if (!entries.is_object()) throw ValidationError(where + ": 'entries' must be an object");
  DerivTensor<Value> t(j);
  std::vector<bool> seen(j + 1, false);
  for (const auto& [key, val] : entries.items()) {
    const auto [a, b] = parse_multi_index(key);
    if (a + b != j) throw ValidationError(where + ": key '" + key + "' does not sum to order " + std::to_string(j));
    if constexpr (std::is_same_v<Value, double>) {
      if (!val.is_number()) throw ValidationError(where + ": entry '" + key + "' must be a number");
      t.entry(a, b) = val.template get<double>();
    } else {
      if (!val.is_array() || val.size() != 3 || !val[0].is_number() || !val[1].is_number() || !val[2].is_number())
        throw ValidationError(where + ": entry '" + key + "' must be [x,y,z]");
      t.entry(a, b) = Vec3(val[0].template get<double>(), val[1].template get<double>(), val[2].template get<double>());
    }
    seen[b] = true;
  }
  for (int b = 0; b <= j; ++b)
    if (!seen[b]) throw ValidationError(where + ": entry '" + multi_index_key(j - b, b) + "' missing");
  return t;
}

/// Tensor exchange document for scalar tensors.
inline json tensors_to_json(std::span<const ScalarTensor> tensors, int order) {
  json doc;
  doc["order"] = order;
  doc["value_dim"] = 1;
  doc["tensors"] = json::array();
  for (const auto& t : tensors) doc["tensors"].push_back({{"j", t.order()}, {"entries", entries_to_json(t)}});
  return doc;
}

inline json tensors_to_json(std::span<const VecTensor> tensors, int order) {
  json doc;
  doc["order"] = order;
  doc["value_dim"] = 3;
  doc["tensors"] = json::array();
  for (const auto& t : tensors) doc["tensors"].push_back({{"j", t.order()}, {"entries", entries_to_json(t)}});
  return doc;
}

/// Reads a tensor exchange document; tensors are returned sorted by order.
template <typename Value>
std::vector<DerivTensor<Value>> tensors_from_json(const json& doc, const std::string& where = "tensors") {
  const int dim = int_field(doc, "value_dim", where);
  if (dim != DerivTensor<Value>::value_dim())
    throw ValidationError(where + ": value_dim " + std::to_string(dim) + " where " +
                          std::to_string(DerivTensor<Value>::value_dim()) + " was expected");
  if (!doc.contains("tensors") || !doc["tensors"].is_array()) throw ValidationError(where + ": 'tensors' must be an array");
  std::vector<DerivTensor<Value>> out;
  for (const auto& item : doc["tensors"]) {
    const int j = int_field(item, "j", where);
    if (j < 0) throw ValidationError(where + ": negative order j");
    if (!item.contains("entries")) throw ValidationError(where + ": tensor j=" + std::to_string(j) + " has no 'entries'");
    out.push_back(tensor_from_entries<Value>(item["entries"], j, where + " j=" + std::to_string(j)));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.order() < y.order(); });
  return out;
}

inline json image_tensors_to_json(const ImageTensors& it) {
  json doc = tensors_to_json(std::span<const ScalarTensor>(it.tensors), it.order);
  doc["i0"] = it.i0;
  return doc;
}

inline ImageTensors image_tensors_from_json(const json& doc, const std::string& where = "image tensors") {
  ImageTensors it;
  it.order = int_field(doc, "order", where);
  it.i0 = number_field(doc, "i0", where);
  for (auto& t : tensors_from_json<double>(doc, where))
    if (t.order() >= 1) it.tensors.push_back(std::move(t));
  for (int j = 1; j <= static_cast<int>(it.tensors.size()); ++j)
    if (it.tensors[j - 1].order() != j) throw ValidationError(where + ": tensor orders must be 1..order without gaps");
  it.validate();
  return it;
}

inline json solution_to_json(const CanonicalSolution& sol) {
  json doc;
  doc["order"] = sol.order;
  doc["i0"] = sol.i0;
  doc["c1"] = sol.c1;
  doc["c2"] = sol.c2;
  doc["rows"] = json::array();
  for (const auto& r : sol.rows)
    doc["rows"].push_back({{"j", r.order()},
                           {"r1", entries_to_json(r.r1)},
                           {"r2", entries_to_json(r.r2)},
                           {"r3", entries_to_json(r.r3)}});
  return doc;
}

inline CanonicalSolution solution_from_json(const json& doc, const std::string& where = "solution") {
  CanonicalSolution sol;
  sol.order = int_field(doc, "order", where);
  sol.i0 = number_field(doc, "i0", where);
  sol.c1 = number_field(doc, "c1", where);
  sol.c2 = number_field(doc, "c2", where);
  if (!doc.contains("rows") || !doc["rows"].is_array()) throw ValidationError(where + ": 'rows' must be an array");
  for (const auto& item : doc["rows"]) {
    const int j = int_field(item, "j", where);
    const std::string w = where + " j=" + std::to_string(j);
    for (const char* name : {"r1", "r2", "r3"})
      if (!item.contains(name)) throw ValidationError(w + ": missing '" + name + "'");
    sol.rows.push_back({tensor_from_entries<double>(item["r1"], j, w + " r1"),
                        tensor_from_entries<double>(item["r2"], j, w + " r2"),
                        tensor_from_entries<double>(item["r3"], j, w + " r3")});
  }
  std::sort(sol.rows.begin(), sol.rows.end(), [](const auto& x, const auto& y) { return x.order() < y.order(); });
  if (static_cast<int>(sol.rows.size()) != sol.order)
    throw ValidationError(where + ": expected " + std::to_string(sol.order) + " rows, found " +
                          std::to_string(sol.rows.size()));
  for (int j = 1; j <= sol.order; ++j)
    if (sol.rows[j - 1].order() != j) throw ValidationError(where + ": row orders must be 1..order");
  if (std::abs(sol.i0) > 1.0) throw ValidationError(where + ": |i0| must be <= 1");
  return sol;
}

inline json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON (" + e.what() + ")");
  }
}

inline void write_json_file(const std::string& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot open '" + path + "' for writing");
  os << doc.dump(2) << '\n';
}

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError(what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

inline Vec3 parse_vec3(const std::string& text, const std::string& what) {
  const auto v = parse_number_list(text, what);
  if (v.size() != 3) throw ValidationError(what + ": expected three comma-separated numbers");
  return {v[0], v[1], v[2]};
}

/// "cylinder[:radius]", "sphere[:radius]" or "poly:a,b=c;a,b=c;...".
inline Scene parse_scene(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto radius = [&] {
    if (params.empty()) return 1.0;
    const auto v = parse_number_list(params, "--scene radius");
    if (v.size() != 1) throw ValidationError("--scene: expected a single radius");
    return v[0];
  };
  if (name == "cylinder") return Scene::cylinder(radius());
  if (name == "sphere") return Scene::sphere(radius());
  if (name == "poly") {
    std::map<std::pair<int, int>, double> coeffs;
    std::stringstream ss(params);
    std::string term;
    while (std::getline(ss, term, ';')) {
      if (term.empty()) continue;
      const auto eq = term.find('=');
      if (eq == std::string::npos) throw ValidationError("--scene poly: term '" + term + "' must be a,b=value");
      const auto ab = parse_multi_index(term.substr(0, eq));
      const auto v = parse_number_list(term.substr(eq + 1), "--scene poly");
      if (v.size() != 1) throw ValidationError("--scene poly: term '" + term + "' must be a,b=value");
      coeffs[ab] += v[0];
    }
    if (coeffs.empty()) throw ValidationError("--scene poly: no coefficients given");
    return Scene::polynomial(std::move(coeffs));
  }
  throw ValidationError("--scene: unknown scene '" + name + "' (cylinder, sphere, poly)");
}

}  // namespace tsfs::io
