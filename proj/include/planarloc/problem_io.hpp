#pragma once

// JSON problem files.
//
//   {
//     "schema_version": 1,
//     "intrinsics": {"fx": .., "fy": .., "cx": .., "cy": ..},
//     "settings": {"iterations": .., "rng_seed": .., "rcheck_deg": ..,
//                  "consistency_deg": .., "sampson_inlier": ..},
//     "references": [
//       {"rotation": [9 floats, row-major], "translation": [3 floats],
//        "correspondences": [{"qx": .., "qy": .., "rx": .., "ry": ..}, ...]}
//     ],
//     "ground_truth": {"rotation": [...], "translation": [...]},   optional
//     "outlier_mask": [[bool, ...], ...]                            optional
//   }
//
// Correspondences are stored in normalized image coordinates. "settings" is
// optional on read and defaults to CheckThresholds{} / 100 iterations.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "planarloc/core_geometry.hpp"
#include "planarloc/problem.hpp"

namespace planarloc {

inline constexpr int kProblemSchemaVersion = 1;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaVersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemFile {
  LocalizationProblem problem;
  std::optional<RigidPose> ground_truth;
  std::optional<std::vector<std::vector<bool>>> outlier_mask;

  friend bool operator==(const ProblemFile&, const ProblemFile&) = default;
};

namespace detail {

using nlohmann::json;

inline json pose_to_json(const RigidPose& p) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(p.rotation(r, c));
  }
  return json{{"rotation", rot},
              {"translation",
               {p.translation.x(), p.translation.y(), p.translation.z()}}};
}

inline const json& field(const json& obj, const char* key,
                         const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

inline double number(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& v, std::size_t n,
                                   const std::string& path) {
  if (!v.is_array() || v.size() != n) {
    throw ParseError(path + ": expected an array of " + std::to_string(n) +
                     " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_number()) {
      throw ParseError(path + "[" + std::to_string(i) + "]: expected a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

inline RigidPose pose_from_json(const json& obj, const std::string& path) {
  const auto r = numbers(field(obj, "rotation", path), 9, path + ".rotation");
  const auto t =
      numbers(field(obj, "translation", path), 3, path + ".translation");
  RigidPose p;
  for (int i = 0; i < 9; ++i) p.rotation(i / 3, i % 3) = r[i];
  p.translation = Eigen::Vector3d(t[0], t[1], t[2]);
  return p;
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + std::size_t(std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace detail

inline std::string problem_to_json(const ProblemFile& file) {
  using detail::json;
  const LocalizationProblem& p = file.problem;
  json doc;
  doc["schema_version"] = kProblemSchemaVersion;
  doc["intrinsics"] = {{"fx", p.intrinsics.fx},
                       {"fy", p.intrinsics.fy},
                       {"cx", p.intrinsics.cx},
                       {"cy", p.intrinsics.cy}};
  doc["settings"] = {{"iterations", p.iterations},
                     {"rng_seed", p.rng_seed},
                     {"rcheck_deg", p.thresholds.rcheck_deg},
                     {"consistency_deg", p.thresholds.consistency_deg},
                     {"sampson_inlier", p.thresholds.sampson_inlier}};
  json refs = json::array();
  for (const ReferenceView& ref : p.references) {
    json r = detail::pose_to_json(ref.pose);
    json corr = json::array();
    for (const Correspondence& c : ref.correspondences) {
      corr.push_back({{"qx", c.query_point.x()},
                      {"qy", c.query_point.y()},
                      {"rx", c.reference_point.x()},
                      {"ry", c.reference_point.y()}});
    }
    r["correspondences"] = std::move(corr);
    refs.push_back(std::move(r));
  }
  doc["references"] = std::move(refs);
  if (file.ground_truth) doc["ground_truth"] = detail::pose_to_json(*file.ground_truth);
  if (file.outlier_mask) doc["outlier_mask"] = *file.outlier_mask;
  return doc.dump(1);
}

inline ProblemFile problem_from_json(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " +
                     std::to_string(detail::line_of_offset(text, e.byte)) +
                     ": " + e.what());
  }
  const std::string root = "$";
  const json& version = detail::field(doc, "schema_version", root);
  if (!version.is_number_integer()) {
    throw ParseError("$.schema_version: expected an integer");
  }
  if (version.get<int>() != kProblemSchemaVersion) {
    throw SchemaVersionMismatch("schema_version " +
                                std::to_string(version.get<int>()) +
                                " is not supported (expected " +
                                std::to_string(kProblemSchemaVersion) + ")");
  }

  ProblemFile out;
  LocalizationProblem& p = out.problem;
  const json& k = detail::field(doc, "intrinsics", root);
  p.intrinsics.fx = detail::number(k, "fx", "$.intrinsics");
  p.intrinsics.fy = detail::number(k, "fy", "$.intrinsics");
  p.intrinsics.cx = detail::number(k, "cx", "$.intrinsics");
  p.intrinsics.cy = detail::number(k, "cy", "$.intrinsics");

  if (doc.contains("settings")) {
    const json& s = doc["settings"];
    const std::string path = "$.settings";
    const json& it = detail::field(s, "iterations", path);
    const json& seed = detail::field(s, "rng_seed", path);
    if (!it.is_number_integer() || !seed.is_number_unsigned()) {
      throw ParseError(path + ": iterations/rng_seed must be integers");
    }
    p.iterations = it.get<int>();
    p.rng_seed = seed.get<std::uint64_t>();
    p.thresholds.rcheck_deg = detail::number(s, "rcheck_deg", path);
    p.thresholds.consistency_deg = detail::number(s, "consistency_deg", path);
    p.thresholds.sampson_inlier = detail::number(s, "sampson_inlier", path);
  }

  const json& refs = detail::field(doc, "references", root);
  if (!refs.is_array()) throw ParseError("$.references: expected an array");
  for (std::size_t r = 0; r < refs.size(); ++r) {
    const std::string path = "$.references[" + std::to_string(r) + "]";
    ReferenceView view;
    view.pose = detail::pose_from_json(refs[r], path);
    const json& corr = detail::field(refs[r], "correspondences", path);
    if (!corr.is_array()) {
      throw ParseError(path + ".correspondences: expected an array");
    }
    for (std::size_t m = 0; m < corr.size(); ++m) {
      const std::string cpath =
          path + ".correspondences[" + std::to_string(m) + "]";
      Correspondence c;
      c.query_point = Eigen::Vector2d(detail::number(corr[m], "qx", cpath),
                                      detail::number(corr[m], "qy", cpath));
      c.reference_point = Eigen::Vector2d(detail::number(corr[m], "rx", cpath),
                                          detail::number(corr[m], "ry", cpath));
      c.reference_index = int(r);
      view.correspondences.push_back(c);
    }
    p.references.push_back(std::move(view));
  }

  if (doc.contains("ground_truth")) {
    out.ground_truth = detail::pose_from_json(doc["ground_truth"], "$.ground_truth");
  }
  if (doc.contains("outlier_mask")) {
    const json& m = doc["outlier_mask"];
    try {
      out.outlier_mask = m.get<std::vector<std::vector<bool>>>();
    } catch (const json::exception&) {
      throw ParseError("$.outlier_mask: expected an array of boolean arrays");
    }
  }

  if (!p.intrinsics.is_valid()) {
    throw InvalidProblem("intrinsics must have positive focal lengths");
  }
  if (p.references.size() < 2) {
    throw InvalidProblem("a problem needs at least 2 references, got " +
                         std::to_string(p.references.size()));
  }
  if (!p.thresholds.is_valid() || p.iterations < 1) {
    throw InvalidProblem("thresholds and iterations must be positive");
  }
  return out;
}

inline void write_problem(const std::string& path, const ProblemFile& file) {
  std::ofstream os(path);
  if (!os) throw ParseError("cannot open " + path + " for writing");
  os << problem_to_json(file) << '\n';
}

inline ProblemFile read_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return problem_from_json(ss.str());
}

}  // namespace planarloc
