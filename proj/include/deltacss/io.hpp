#pragma once

// JSON and CSV export with fixed %.15g float formatting so reports are byte-reproducible.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "deltacss/catalog.hpp"
#include "deltacss/classification.hpp"
#include "deltacss/curve.hpp"
#include "deltacss/linalg.hpp"
#include "deltacss/mechanism.hpp"
#include "deltacss/witness.hpp"

namespace deltacss::io {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace detail {

inline void dump(const Json& j, std::ostream& os, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        dump(it.value(), os, indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",");
        if (!flat) os << nl << pad;
        first = false;
        dump(e, os, indent, depth + 1);
      }
      if (!flat) os << nl << close;
      os << ']';
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Serialize with floats as %.15g.
inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::dump(j, os, indent, 0);
  os << '\n';
  return os.str();
}

inline const std::array<const char*, 15>& coordinate_names() {
  static const std::array<const char*, 15> names{"x1", "y1", "z1", "x2", "y2", "z2", "x3", "y3",
                                                 "z3", "ca1", "sa1", "ca2", "sa2", "ca3", "sa3"};
  return names;
}

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline Json to_json(const ParameterSet& p) { return Json{{"a", p.a}, {"b", p.b}, {"d", p.d}}; }

inline Json to_json(const ToleranceConfig& t) {
  return Json{{"rank_rel_tol", t.rank_rel_tol},
              {"residual_tol", t.residual_tol},
              {"fd_step", t.fd_step},
              {"branch_match_tol", t.branch_match_tol}};
}

inline Json to_json(const DenominatorGuard& g) {
  return Json{{"u_q4", g.u_q4}, {"u_q3", g.u_q3}, {"discriminant", g.discriminant},
              {"proof_holds", g.proof_holds}};
}

inline Json to_json(const SingularPointRecord& r) {
  Json j;
  j["label"] = r.label ? to_string(*r.label) : std::string("candidate");
  j["element"] = r.element.name();
  j["config"] = to_json(r.config);
  j["residual_max"] = r.residual_max;
  j["singular_values"] = to_json(r.singular_values);
  j["rank"] = r.rank;
  j["excluded"] = r.excluded;
  j["certificate_unavailable"] = r.certificate_unavailable;
  j["passed"] = r.passed;
  return j;
}

inline Json catalog_json(const ParameterSet& prm, const std::vector<SingularPointRecord>& records) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["parameters"] = to_json(prm);
  j["excluded_case"] = excluded_case(prm);
  j["guards"] = to_json(denominator_guard(prm));
  Json pts = Json::array();
  for (const auto& r : records) pts.push_back(to_json(r));
  j["points"] = std::move(pts);
  return j;
}

inline std::string catalog_csv(const std::vector<SingularPointRecord>& records) {
  std::ostringstream os;
  os << "label,element";
  for (const char* n : coordinate_names()) os << ',' << n;
  os << ",residual_max,rank,sigma_ratio,passed\n";
  for (const auto& r : records) {
    os << (r.label ? to_string(*r.label) : std::string("candidate")) << ',' << r.element.name();
    for (Eigen::Index k = 0; k < r.config.size(); ++k) os << ',' << format_double(r.config(k));
    const auto n = r.singular_values.size();
    const double ratio = n > 0 && r.singular_values(0) > 0.0 ? r.singular_values(n - 1) / r.singular_values(0) : 0.0;
    os << ',' << format_double(r.residual_max) << ',' << r.rank << ',' << format_double(ratio) << ','
       << (r.passed ? "true" : "false") << '\n';
  }
  return os.str();
}

inline Json to_json(const NonManifoldCertificate& c) {
  Json j;
  j["mechanism"] = c.mechanism;
  j["point"] = to_json(c.point);
  j["base_point"] = to_json(c.base_point);
  j["pattern"] = c.pattern;
  Json paths = Json::array();
  for (std::size_t k = 0; k < c.tangents.size(); ++k) {
    Json p;
    p["label"] = c.labels[k];
    p["recipe"] = c.recipes[k];
    p["t0"] = c.t0[k];
    p["half_width"] = c.half_widths[k];
    p["tangent"] = to_json(c.tangents[k]);
    paths.push_back(std::move(p));
  }
  j["paths"] = std::move(paths);
  j["tangent_singular_values"] = to_json(c.tangent_singular_values);
  j["span_rank"] = c.span_rank;
  j["span_ratio"] = c.span_ratio();
  j["max_path_residual"] = c.max_path_residual;
  j["assumed_local_dimension"] = c.assumed_local_dimension;
  j["verdict"] = c.valid ? "non-manifold" : "inconclusive";
  return j;
}

inline std::string path_csv(const std::vector<PathSample>& samples) {
  std::ostringstream os;
  os << 't';
  const auto dim = samples.empty() ? 0 : samples.front().config.size();
  for (Eigen::Index k = 0; k < dim; ++k) {
    os << ',' << (dim == 15 ? std::string(coordinate_names()[static_cast<std::size_t>(k)]) : "c" + std::to_string(k + 1));
  }
  os << ",residual_max\n";
  for (const auto& s : samples) {
    os << format_double(s.t);
    for (Eigen::Index k = 0; k < s.config.size(); ++k) os << ',' << format_double(s.config(k));
    os << ',' << format_double(s.residual) << '\n';
  }
  return os.str();
}

inline Json to_json(const KinematicClass& k) {
  Json j;
  j["css"] = k.css;
  j["css_evidence"] = to_string(k.css_evidence);
  j["ees"] = k.ees;
  j["as"] = k.as;
  j["regular"] = k.regular;
  j["jacobian_rank"] = k.jacobian_rank;
  j["jacobian_singular_values"] = to_json(k.jacobian_singular_values);
  j["tangent_dim"] = k.tangent_dim;
  j["forward_rank"] = k.forward_rank;
  j["actuator_rank"] = k.actuator_rank;
  Json subsets = Json::array();
  for (const auto& s : k.subset_ranks) {
    Json members = Json::array();
    for (unsigned a = 0; a < 32; ++a) {
      if (s.mask & (1u << a)) members.push_back(a + 1);
    }
    subsets.push_back(Json{{"actuators", members}, {"rank", s.rank}});
  }
  j["subset_ranks"] = std::move(subsets);
  return j;
}

inline Json to_json(const SearchResult& r) {
  Json j;
  j["rng_seed"] = r.rng_seed;
  j["seeds_run"] = r.seeds_run;
  Json c = Json::array();
  for (const auto& cand : r.candidates) {
    c.push_back(Json{{"config", to_json(cand.config)},
                     {"sigma_ratio", cand.sigma_ratio},
                     {"seed_index", cand.seed_index},
                     {"nearest_catalog_index", cand.nearest_catalog},
                     {"nearest_catalog_distance", cand.catalog_distance},
                     {"matched", cand.matched}});
  }
  j["candidates"] = std::move(c);
  return j;
}

/// Plot data: "x y" per line, no header.
inline std::string plot_data(const std::vector<curve::CurveSample>& samples) {
  std::ostringstream os;
  for (const auto& s : samples) os << format_double(s.x) << ' ' << format_double(s.y) << '\n';
  return os.str();
}

/// Top-level report of one CLI run.
struct RunReport {
  std::string command;
  Json parameters = Json::object();
  Json tolerances = Json::object();
  std::optional<std::uint64_t> seed;
  Json checks = Json::array();
  Json timings = Json::object();
  bool include_timings = false;
  bool passed = true;

  void add_check(const std::string& name, bool ok, Json detail = Json::object()) {
    Json c;
    c["name"] = name;
    c["passed"] = ok;
    c["detail"] = std::move(detail);
    checks.push_back(std::move(c));
    passed = passed && ok;
  }

  [[nodiscard]] Json to_json() const {
    Json j;
    j["schema"] = kSchemaVersion;
    j["tool"] = "deltacss";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["parameters"] = parameters;
    j["tolerances"] = tolerances;
    if (seed) j["seed"] = *seed;
    j["checks"] = checks;
    j["verdict"] = passed ? "pass" : "fail";
    if (include_timings) j["timings"] = timings;
    return j;
  }
};

}  // namespace deltacss::io
