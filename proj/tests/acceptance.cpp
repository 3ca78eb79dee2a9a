// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "deltacss/deltacss.hpp"
#include "oracles.hpp"

using namespace deltacss;

namespace {

const ParameterSet kMain{3.0, 5.0, 0.5};
const ParameterSet kSecond{2.0, 3.0, 0.25};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome catalog_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto orbit = catalog_orbit(kMain);
  const auto m = build_delta(kMain);
  bool ok = orbit.size() == 24;
  double min_dist = 1e300, worst_res = 0, worst_s12 = 0, min_s11 = 1e300;
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    for (std::size_t j = i + 1; j < orbit.size(); ++j) {
      min_dist = std::min(min_dist, (orbit[i].config - orbit[j].config).norm());
    }
    const Vector x = orbit[i].config;
    worst_res = std::max(worst_res, max_residual(m, x));
    const Vector sv = singular_values(m.constraints.jacobian(x));
    worst_s12 = std::max(worst_s12, sv(11) / sv(0));
    min_s11 = std::min(min_s11, sv(10) / sv(0));
    ok = ok && numerical_rank(m.constraints.jacobian(x)) == 11;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && min_dist > 1e-3 && worst_res <= 1e-9 * 25 && worst_s12 <= 1e-10 && min_s11 >= 1e-6 && secs < 1.0;
  return {ok, std::to_string(orbit.size()) + " points, min distance " + fmt("%.3g", min_dist) +
                  ", max residual " + fmt("%.2g", worst_res) + ", max s12/s1 " + fmt("%.2g", worst_s12) +
                  ", min s11/s1 " + fmt("%.3g", min_s11) + ", " + fmt("%.3f", secs) + " s"};
}

Outcome free_action() {
  std::vector<Vector> pts;
  for (const auto& o : catalog_orbit(kMain)) pts.push_back(o.config);
  const auto rep = is_free_on(pts, 1e-6);
  bool sizes = true;
  for (auto l : kCatalogLabels) sizes = sizes && orbit({closed_form_point(l, kMain)}).size() == 6;
  return {rep.free && sizes && rep.min_displacement >= 1e-6,
          "min displacement " + fmt("%.4g", rep.min_displacement) + ", orbit sizes " +
              (sizes ? "all 6" : "not all 6")};
}

Outcome certificates() {
  const auto start = std::chrono::steady_clock::now();
  int valid = 0, total = 0;
  double min_ratio = 1e300, worst_res = 0;
  std::string failure;
  for (const auto& prm : {kMain, kSecond}) {
    const auto m = build_delta(prm);
    for (const auto& o : catalog_orbit(prm)) {
      ++total;
      try {
        const auto c = certify(m, o.config);
        bool full_window = true;
        for (double w : c.half_widths) full_window = full_window && w == 0.05;
        const bool ok = c.span_rank == 4 && c.span_ratio() > 1e-6 && full_window &&
                        c.max_path_residual <= 1e-8 * prm.b * prm.b;
        valid += ok ? 1 : 0;
        min_ratio = std::min(min_ratio, c.span_ratio());
        worst_res = std::max(worst_res, c.max_path_residual / (prm.b * prm.b));
      } catch (const Error& e) {
        failure = e.what();
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {valid == total && total == 48 && secs < 10.0,
          std::to_string(valid) + "/" + std::to_string(total) + " certified, min s4/s1 " +
              fmt("%.3g", min_ratio) + ", max residual/b^2 " + fmt("%.2g", worst_res) + ", " +
              fmt("%.3f", secs) + " s" + (failure.empty() ? "" : ", " + failure)};
}

Outcome generic_regularity() {
  const auto m = build_delta(kMain);
  std::vector<Vector> catalog;
  for (const auto& o : catalog_orbit(kMain)) catalog.push_back(o.config);
  std::mt19937_64 rng(4);
  int full = 0, drawn = 0;
  while (drawn < 100) {
    const Vector x = random_on_variety(kMain, rng);
    if (nearest_point(catalog, x).second < 0.1) continue;
    ++drawn;
    full += numerical_rank(m.constraints.jacobian(x)) == 12 ? 1 : 0;
  }
  ToleranceConfig tol;
  tol.branch_match_tol = 1e-4;
  const auto start = std::chrono::steady_clock::now();
  const auto res = rank_deficiency_search(m, 1000, 200, tol);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::size_t matched = 0;
  double worst = 0;
  for (const auto& c : res.candidates) {
    matched += c.matched ? 1 : 0;
    worst = std::max(worst, c.catalog_distance);
  }
  return {full == 100 && matched == res.candidates.size() && res.seeds_run == 1000,
          std::to_string(full) + "/100 random points with rank 12; search: " +
              std::to_string(res.candidates.size()) + " candidates from " + std::to_string(res.seeds_run) +
              " seeds, " + std::to_string(matched) + " matched, worst distance " + fmt("%.2g", worst) +
              ", " + fmt("%.2f", secs) + " s"};
}

Outcome symmetry_invariance() {
  const auto m = build_delta(kMain);
  std::mt19937_64 rng(5);
  double worst = 0;
  bool diag = true;
  for (const auto& g : all_elements()) {
    const auto fit = constraint_mixing_matrix(m, g, rng, 200, 1e-10);
    // Re-check on independent evaluation points.
    std::uniform_real_distribution<double> coord(-10.0, 10.0);
    const Matrix psi = representation(g).cast<double>();
    for (int k = 0; k < 200; ++k) {
      Vector x(15);
      for (int i = 0; i < 15; ++i) x(i) = coord(rng);
      const Vector mis = m.constraints.evaluate(psi * x) - fit.matrix * m.constraints.evaluate(x);
      worst = std::max(worst, mis.cwiseAbs().maxCoeff());
    }
    if (g == GroupElement::s()) {
      for (int i = 0; i < 12; ++i) {
        const double expect = (i == 8 || i == 11) ? -1.0 : 1.0;
        diag = diag && std::abs(fit.matrix(i, i) - expect) < 1e-10 &&
               (fit.matrix - Matrix(fit.matrix.diagonal().asDiagonal())).cwiseAbs().maxCoeff() < 1e-10;
      }
    }
  }
  return {worst <= 1e-10 && diag, "max misfit " + fmt("%.2g", worst) + ", A_s diagonal " +
                                      (diag ? "-1 at l3,l6 only" : "wrong")};
}

Outcome denominator_guard_check() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.05, 10.0);
  double min_den = 1e300;
  bool disc = true;
  int drawn = 0;
  while (drawn < 10000) {
    const ParameterSet prm{u(rng), u(rng), u(rng)};
    try {
      prm.validate();
    } catch (const ParameterError&) {
      continue;
    }
    ++drawn;
    const auto g = denominator_guard(prm);
    min_den = std::min({min_den, g.u_q3, g.u_q4});
    if (prm.a > prm.d) disc = disc && g.discriminant < 0.0;
  }
  return {min_den > 0.0 && disc, "10000 parameter sets, min denominator " + fmt("%.4g", min_den) +
                                     ", discriminant negative " + (disc ? "always" : "not always")};
}

Outcome crank_slider() {
  bool ok = true;
  std::string detail;
  try {
    const auto cert = crank_slider_witness(1.0);
    const auto m = build_crank_slider(1.0, 1.0);
    const int rank = numerical_rank(m.constraints.jacobian(Vector(Vec3(0, 1, 0))));
    ok = cert.valid && cert.span_rank == 2 && cert.assumed_local_dimension == 1 && rank == 1;
    detail = "span " + std::to_string(cert.span_rank) + ", Jacobian rank " + std::to_string(rank);
  } catch (const Error& e) {
    return {false, e.what()};
  }
  const auto m = build_crank_slider(1.0, 2.0);
  double min_s2 = 1e300, worst = 0;
  for (int k = 0; k < 10000; ++k) {
    const double t = 2.0 * M_PI * k / 10000.0;
    const double xb = std::cos(t), yb = std::sin(t);
    const Vector x = Vec3(xb, yb, xb + std::sqrt(4.0 - yb * yb));
    worst = std::max(worst, max_residual(m, x));
    const Vector sv = singular_values(m.constraints.jacobian(x));
    min_s2 = std::min(min_s2, sv(1));
  }
  ok = ok && min_s2 > 1e-3 && worst <= 1e-12;
  return {ok, detail + "; (1,2) sweep of 10000: min s2 " + fmt("%.6g", min_s2)};
}

Outcome geometry_oracle() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2), r(0.5, 2);
  double worst = 0;
  int inst = 0;
  while (inst < 100) {
    const Vec2 c(u(rng), u(rng));
    const double r0 = r(rng), r1 = r(rng);
    if (c.norm() < std::abs(r0 - r1) + 0.05 || c.norm() > r0 + r1 - 0.05) continue;
    const auto roots = oracle::circle_pair_brute_force(c, r0, r1);
    if (roots.size() != 2) return {false, "brute-force solver found " + std::to_string(roots.size()) + " roots"};
    MovingCircle2 mc;
    mc.at = [c, r1](double) { return PlanarCircle{c, r1}; };
    for (auto b : {Branch::Plus, Branch::Minus}) {
      const Vec2 z = circle_circle_branch(r0, mc, b, 0.0);
      worst = std::max(worst, std::min((z - roots[0]).norm(), (z - roots[1]).norm()));
    }
    ++inst;
  }
  double worst_limit = 0;
  for (int k = 0; k < 20; ++k) {
    const Vec2 v(u(rng), u(rng)), w(u(rng), u(rng));
    const double r0 = r(rng), kk = 0.5 * u(rng);
    MovingCircle2 fam;
    fam.at = [=](double t) { return PlanarCircle{t * v + t * t * w, r0 + kk * t * t}; };
    fam.degenerate_at = 0.0;
    const Vec2 bplus = r0 * perp(v) / v.norm();
    worst_limit = std::max(worst_limit, (circle_circle_branch(r0, fam, Branch::Plus, 0.0) - bplus).norm());
    worst_limit = std::max(worst_limit, (circle_circle_branch(r0, fam, Branch::Minus, 0.0) + bplus).norm());
  }
  return {worst <= 1e-9 && worst_limit <= 1e-8,
          "100 instances, max error " + fmt("%.2g", worst) + "; 20 degenerate families, max error " +
              fmt("%.2g", worst_limit)};
}

Outcome curve_demo() {
  const auto xs = curve::linspace(-1.0, 1.0, 101);
  const auto ys = curve::linspace(-0.2, 1.0, 101);
  const double id = curve::factor_identity_residual(xs, ys);
  // 2-D Newton on (f, x - x0) from a grid of starts around the origin.
  double worst = 0;
  int roots = 0;
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) {
      const double x0 = 0.02 * i;
      double x = x0 + 0.005, y = 0.01 * j;
      bool conv = false;
      for (int it = 0; it < 100; ++it) {
        const double f = curve::curve_eval(x, y);
        const double g = x - x0;
        const double fx = 2 * x * y - 4 * x * x * x, fy = 3 * y * y + x * x;
        if (fy == 0.0) break;
        // Jacobian [[fx, fy], [1, 0]].
        const double dx = g;
        const double dy = (f - fx * dx) / fy;
        x -= dx;
        y -= dy;
        if (std::abs(dx) + std::abs(dy) < 1e-15) {
          conv = true;
          break;
        }
      }
      if (!conv || std::abs(y) > 0.3) continue;
      ++roots;
      worst = std::max(worst, std::abs(y - curve::branch(x)));
    }
  }
  return {id <= 1e-12 && worst <= 1e-8 && roots > 0,
          "identity residual " + fmt("%.2g", id) + "; " + std::to_string(roots) +
              " Newton roots, max distance to branch " + fmt("%.2g", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"catalog reproduction", catalog_reproduction},
      {"free action", free_action},
      {"non-manifold certificates", certificates},
      {"generic regularity", generic_regularity},
      {"symmetry invariance", symmetry_invariance},
      {"denominator guard", denominator_guard_check},
      {"crank slider", crank_slider},
      {"geometry oracle", geometry_oracle},
      {"curve demo", curve_demo},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
