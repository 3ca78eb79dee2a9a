// deltacss: verify, explore and export Delta manipulator singularities.
//
// Exit codes: 0 all checks passed, 1 usage or parameter error, 2 a check failed,
// 3 parameters in the excluded case (report still written).

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deltacss/deltacss.hpp"

namespace {

using deltacss::io::Json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheck = 2;
constexpr int kExitExcluded = 3;

struct CommonOptions {
  double a = 3.0;
  double b = 5.0;
  double d = 0.5;
  deltacss::ToleranceConfig tol;
  std::string format = "json";
  std::string out = "-";
  bool timings = false;

  [[nodiscard]] deltacss::ParameterSet params() const { return {a, b, d}; }
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void add_parameter_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--a", o.a, "upper arm length a");
  cmd->add_option("--b", o.b, "lower arm length b");
  cmd->add_option("--d", o.d, "base/platform offset d");
}

void add_tolerance_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--tol-rank", o.tol.rank_rel_tol, "relative singular value cutoff for ranks");
  cmd->add_option("--tol-residual", o.tol.residual_tol, "residual tolerance relative to b^2");
  cmd->add_option("--fd-step", o.tol.fd_step, "finite-difference step for tangents");
}

void add_output_flags(CLI::App* cmd, CommonOptions& o, bool with_format) {
  if (with_format) {
    cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"json", "csv"}));
  }
  cmd->add_option("--out", o.out, "output path, '-' for stdout");
  cmd->add_flag("--timings", o.timings, "include wall-clock timings in the report");
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw deltacss::InputError("cannot open output file " + path);
  f << content;
}

deltacss::io::RunReport make_report(const std::string& command, const CommonOptions& o) {
  deltacss::io::RunReport r;
  r.command = command;
  r.parameters = deltacss::io::to_json(o.params());
  r.tolerances = deltacss::io::to_json(o.tol);
  r.include_timings = o.timings;
  return r;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream is(cleaned);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw deltacss::InputError("not a number: '" + tok + "'");
    }
  }
  return out;
}

deltacss::GroupElement parse_element(const std::string& name) {
  for (const auto& g : deltacss::all_elements()) {
    if (g.name() == name) return g;
  }
  throw deltacss::InputError("unknown group element '" + name + "' (e, s, r, rs, r2, r2s)");
}

// ---------------------------------------------------------------- verify

int cmd_verify(const CommonOptions& o) {
  Stopwatch clock;
  const auto prm = o.params();
  auto report = make_report("verify", o);
  const auto records = deltacss::full_catalog(prm, o.tol);
  report.timings["catalog_s"] = clock.lap();

  Json catalog;
  catalog["points"] = records.size();
  catalog["excluded_case"] = deltacss::excluded_case(prm);
  catalog["guards"] = deltacss::io::to_json(deltacss::denominator_guard(prm));
  bool all_rank = true;
  for (const auto& r : records) all_rank = all_rank && r.passed;
  report.add_check("catalog", records.size() == 24 && all_rank, catalog);

  const auto m = deltacss::build_delta(prm);
  int certified = 0;
  int unavailable = 0;
  for (const auto& r : records) {
    Json detail;
    detail["label"] = deltacss::to_string(*r.label);
    detail["element"] = r.element.name();
    detail["rank"] = r.rank;
    detail["residual_max"] = r.residual_max;
    const std::string name = "certificate " + deltacss::to_string(*r.label) + "/" + r.element.name();
    if (r.certificate_unavailable) {
      ++unavailable;
      detail["status"] = "certificate unavailable";
      report.add_check(name, true, detail);
      continue;
    }
    try {
      const auto cert = deltacss::certify(m, r.config, o.tol);
      detail["status"] = "certified";
      detail["span_rank"] = cert.span_rank;
      detail["span_ratio"] = cert.span_ratio();
      detail["max_path_residual"] = cert.max_path_residual;
      ++certified;
      report.add_check(name, cert.valid, detail);
    } catch (const deltacss::Error& e) {
      detail["status"] = "failed";
      detail["error"] = e.what();
      report.add_check(name, false, detail);
      std::cerr << name << ": " << e.what() << '\n';
    }
  }
  report.timings["certificates_s"] = clock.lap();
  Json summary = report.to_json();
  summary["certified"] = certified;
  summary["certificate_unavailable"] = unavailable;
  write_output(o.out, deltacss::io::dump(summary));
  std::cerr << certified << "/" << records.size() << " certified";
  if (unavailable > 0) std::cerr << ", " << unavailable << " unavailable (excluded case)";
  std::cerr << '\n';
  if (!report.passed) return kExitCheck;
  if (deltacss::excluded_case(prm)) {
    std::cerr << "note: b = |3d^2 - a^2|/q is the excluded case; q3/q4 orbits are not certified\n";
    return kExitExcluded;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- orbit

int cmd_orbit(const CommonOptions& o) {
  const auto prm = o.params();
  const auto records = deltacss::full_catalog(prm, o.tol);
  if (o.format == "csv") {
    write_output(o.out, deltacss::io::catalog_csv(records));
  } else {
    write_output(o.out, deltacss::io::dump(deltacss::io::catalog_json(prm, records)));
  }
  return kExitOk;
}

// ---------------------------------------------------------------- paths

struct PathsOptions {
  std::string point = "q4";
  std::string element = "e";
  int samples = 41;
  double half_width = 0.05;
};

int cmd_paths(const CommonOptions& o, const PathsOptions& po) {
  const auto prm = o.params();
  prm.validate();
  const auto label = deltacss::parse_label(po.point);
  const deltacss::Vector x = deltacss::act(parse_element(po.element), deltacss::closed_form_point(label, prm));
  const auto m = deltacss::build_delta(prm);
  deltacss::CertifyOptions opt;
  opt.samples = po.samples;
  opt.half_width = po.half_width;
  const auto cert = deltacss::certify(m, x, o.tol, opt);
  const auto paths = deltacss::witness_paths(x, prm, o.tol);
  auto residuals = [prm](const deltacss::Vector& y) {
    return deltacss::delta_residuals(prm, y, deltacss::DeltaVariant::Tilde);
  };
  const bool to_dir = o.out != "-";
  if (to_dir) fs::create_directories(o.out);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    deltacss::WitnessPath path = paths[k];
    path.half_width = cert.half_widths[k];
    const auto csv = deltacss::io::path_csv(deltacss::sample_path(path, residuals, po.samples));
    if (to_dir) write_output((fs::path(o.out) / (path.label + ".csv")).string(), csv);
  }
  Json j = deltacss::io::to_json(cert);
  j = Json{{"schema", deltacss::io::kSchemaVersion},
           {"parameters", deltacss::io::to_json(prm)},
           {"label", po.point},
           {"element", po.element},
           {"samples", po.samples},
           {"certificate", j}};
  const std::string text = deltacss::io::dump(j);
  write_output(to_dir ? (fs::path(o.out) / "certificate.json").string() : "-", text);
  std::cerr << po.point << "/" << po.element << ": span " << cert.span_rank << ", max residual "
            << cert.max_path_residual << '\n';
  return cert.valid ? kExitOk : kExitCheck;
}

// ---------------------------------------------------------------- classify

struct ClassifyOptions {
  std::string mechanism = "delta";
  std::string config;
  std::string pose;
  std::string point;
  std::string element = "e";
  double l1 = 1.0;
  double l2 = 1.0;
};

int cmd_classify(const CommonOptions& o, const ClassifyOptions& co) {
  const int given = int(!co.config.empty()) + int(!co.pose.empty()) + int(!co.point.empty());
  if (given != 1) throw deltacss::InputError("give exactly one of --config, --pose, --point");
  Json j;
  j["schema"] = deltacss::io::kSchemaVersion;
  if (co.mechanism == "crank-slider") {
    if (co.config.empty()) throw deltacss::InputError("crank slider needs --config xB,yB,xC");
    const auto v = parse_numbers(co.config);
    if (v.size() != 3) throw deltacss::InputError("crank slider configuration needs 3 numbers");
    const auto m = deltacss::build_crank_slider(co.l1, co.l2);
    const deltacss::Vector x = Eigen::Map<const deltacss::Vector>(v.data(), 3);
    std::optional<deltacss::NonManifoldCertificate> cert;
    if (std::abs(co.l1 - co.l2) <= 1e-12 * std::max(co.l1, co.l2)) {
      auto c = deltacss::crank_slider_witness(co.l1, co.l2, o.tol);
      if ((c.point - x).norm() <= o.tol.branch_match_tol) cert = std::move(c);
    }
    const auto k = deltacss::classify(m, x, o.tol, cert ? &*cert : nullptr);
    j["mechanism"] = m.name;
    j["lengths"] = Json{{"l1", co.l1}, {"l2", co.l2}};
    j["config"] = deltacss::io::to_json(x);
    j["class"] = deltacss::io::to_json(k);
    write_output(o.out, deltacss::io::dump(j));
    return kExitOk;
  }
  if (co.mechanism != "delta") throw deltacss::InputError("mechanism must be delta or crank-slider");
  const auto prm = o.params();
  prm.validate();
  const auto m = deltacss::build_delta(prm);
  deltacss::Vector x;
  if (!co.config.empty()) {
    const auto v = parse_numbers(co.config);
    if (v.size() != deltacss::layout::kDim) {
      throw deltacss::InputError("configuration needs 15 numbers, got " + std::to_string(v.size()));
    }
    x = Eigen::Map<const deltacss::Vector>(v.data(), deltacss::layout::kDim);
  } else if (!co.pose.empty()) {
    const auto v = parse_numbers(co.pose);
    if (v.size() != 6) throw deltacss::InputError("pose needs 6 numbers: px,py,pz,psi1,psi2,psi3");
    deltacss::PlatformPose pose;
    pose.p = deltacss::Vec3(v[0], v[1], v[2]);
    pose.psi = {v[3], v[4], v[5]};
    x = deltacss::from_tilde(deltacss::lift_pose(prm, pose));
  } else {
    x = deltacss::act(parse_element(co.element),
                      deltacss::closed_form_point(deltacss::parse_label(co.point), prm));
  }
  std::optional<deltacss::NonManifoldCertificate> cert;
  if (deltacss::numerical_rank(m.constraints.jacobian(x), o.tol) < m.constraints.dim_out) {
    try {
      cert = deltacss::certify(m, x, o.tol);
    } catch (const deltacss::Error& e) {
      std::cerr << "no certificate: " << e.what() << '\n';
    }
  }
  const auto k = deltacss::classify(m, x, o.tol, cert ? &*cert : nullptr);
  j["mechanism"] = m.name;
  j["parameters"] = deltacss::io::to_json(prm);
  j["config"] = deltacss::io::to_json(x);
  j["class"] = deltacss::io::to_json(k);
  write_output(o.out, deltacss::io::dump(j));
  return kExitOk;
}

// ---------------------------------------------------------------- search

struct SearchOptions {
  int seeds = 100;
  std::uint64_t seed = 20240601;
  int budget = 200;
};

int cmd_search(const CommonOptions& o, const SearchOptions& so) {
  Stopwatch clock;
  const auto prm = o.params();
  const auto m = deltacss::build_delta(prm);
  const auto result = deltacss::rank_deficiency_search(m, so.seeds, so.budget, o.tol, so.seed);
  auto report = make_report("search", o);
  report.seed = so.seed;
  std::size_t matched = 0;
  for (const auto& c : result.candidates) matched += c.matched ? 1 : 0;
  Json detail = deltacss::io::to_json(result);
  detail["matched"] = matched;
  report.add_check("candidates match catalog", matched == result.candidates.size(), detail);
  report.timings["search_s"] = clock.lap();
  write_output(o.out, deltacss::io::dump(report.to_json()));
  std::cerr << result.candidates.size() << " candidates from " << result.seeds_run << " seeds, "
            << matched << " on the catalog\n";
  return report.passed ? kExitOk : kExitCheck;
}

// ---------------------------------------------------------------- curve

struct CurveOptions {
  int count = 401;
  double range = 0.45;
  double coefficient = deltacss::curve::kDefaultCoefficient;
};

int cmd_curve(const CommonOptions& o, const CurveOptions& co) {
  const auto samples = deltacss::curve::emit_plot_samples(co.range, co.count, co.coefficient);
  write_output(o.out, deltacss::io::plot_data(samples));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delta manipulator configuration-space singularities"};
  app.require_subcommand(1);
  app.set_version_flag("--version", deltacss::io::kToolVersion);

  CommonOptions common;
  PathsOptions paths_opt;
  ClassifyOptions classify_opt;
  SearchOptions search_opt;
  CurveOptions curve_opt;

  auto* verify = app.add_subcommand("verify", "reproduce the 24-point catalog and certify every point");
  add_parameter_flags(verify, common);
  add_tolerance_flags(verify, common);
  add_output_flags(verify, common, false);

  auto* orbit = app.add_subcommand("orbit", "export the catalog orbit");
  add_parameter_flags(orbit, common);
  add_tolerance_flags(orbit, common);
  add_output_flags(orbit, common, true);

  auto* paths = app.add_subcommand("paths", "sample witness paths and write a certificate");
  add_parameter_flags(paths, common);
  add_tolerance_flags(paths, common);
  add_output_flags(paths, common, false);
  paths->add_option("--point", paths_opt.point, "catalog representative")
      ->check(CLI::IsMember({"q1", "q2", "q3", "q4"}));
  paths->add_option("--element", paths_opt.element, "group element applied to the representative");
  paths->add_option("--samples", paths_opt.samples, "samples per path")->check(CLI::Range(2, 100000));
  paths->add_option("--half-width", paths_opt.half_width, "path parameter half-width")
      ->check(CLI::PositiveNumber);

  auto* classify = app.add_subcommand("classify", "classify a configuration");
  add_parameter_flags(classify, common);
  add_tolerance_flags(classify, common);
  add_output_flags(classify, common, false);
  classify->add_option("--mechanism", classify_opt.mechanism, "delta or crank-slider")
      ->check(CLI::IsMember({"delta", "crank-slider"}));
  classify->add_option("--config", classify_opt.config, "configuration coordinates, comma separated");
  classify->add_option("--pose", classify_opt.pose, "px,py,pz,psi1,psi2,psi3");
  classify->add_option("--point", classify_opt.point, "catalog representative q1..q4");
  classify->add_option("--element", classify_opt.element, "group element for --point");
  classify->add_option("--l1", classify_opt.l1, "crank length");
  classify->add_option("--l2", classify_opt.l2, "rod length");

  auto* search = app.add_subcommand("search", "local rank-deficiency search from random seeds");
  add_parameter_flags(search, common);
  add_tolerance_flags(search, common);
  add_output_flags(search, common, false);
  search->add_option("--seeds", search_opt.seeds, "number of random starts")->check(CLI::NonNegativeNumber);
  search->add_option("--seed", search_opt.seed, "random seed");
  search->add_option("--budget", search_opt.budget, "iterations per start")->check(CLI::PositiveNumber);

  auto* curve = app.add_subcommand("curve", "plot data for y^3 + c x^2 y - x^4 near the origin");
  add_output_flags(curve, common, false);
  curve->add_option("--count", curve_opt.count, "number of samples")->check(CLI::PositiveNumber);
  curve->add_option("--range", curve_opt.range, "x range [-range, range], below 0.5");
  curve->add_option("--coefficient", curve_opt.coefficient, "coefficient of x^2 y");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    common.tol.validate();
    if (*verify) return cmd_verify(common);
    if (*orbit) return cmd_orbit(common);
    if (*paths) return cmd_paths(common, paths_opt);
    if (*classify) return cmd_classify(common, classify_opt);
    if (*search) return cmd_search(common, search_opt);
    if (*curve) return cmd_curve(common, curve_opt);
  } catch (const deltacss::NotOnVarietyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const deltacss::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const deltacss::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const deltacss::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const deltacss::Error& e) {
    std::cerr << "check failed: " << e.what() << '\n';
    return kExitCheck;
  }
  return kExitUsage;
}
