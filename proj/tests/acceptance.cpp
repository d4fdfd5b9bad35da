// Acceptance run: one PASS/FAIL line per criterion, each with its wall time
// and budget.  Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "fwq/config.hpp"
#include "fwq/geoflow_h2.hpp"
#include "fwq/gluing.hpp"
#include "fwq/pipelines.hpp"
#include "fwq/qg_analysis.hpp"
#include "fwq/simd.hpp"

using namespace fwq;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s <= budget_s;
  const bool ok = o.pass && in_time;
  failures += !ok;
  std::printf("[%s] %2d %s: %s (%.2f s, budget %.0f s%s)\n", ok ? "PASS" : "FAIL", id, name, o.detail.c_str(), s,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string g(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

}  // namespace

int main() {
  const RunConfig cfg = RunConfig::defaults();
  const auto da = cfg.da();
  const PlugModel plug(da, cfg.model.r_tube, cfg.model.collar);
  const MetricField level = MetricField::level(da);
  std::printf("simd backend: %s\n", simd::backend_name(simd::active_backend()));

  criterion(1, "isometry suite", 10, [&] {
    double deck = 0, mu = 0;
    for (DeckGen gen : {DeckGen::Gamma, DeckGen::E1, DeckGen::E2})
      deck = std::max(deck, verify_isometry([&](const Vec3& q) { return da->deck_apply(gen, q); }, level, 1000, 1));
    const MetricField solv = MetricField::solv(da->lambda());
    for (double a : {-1.0, 0.37, 2.0})
      mu = std::max(mu, verify_isometry([&](const Vec3& q) { return mu_a(q, a, da->lambda()); }, solv, 1000, 2));
    return Outcome{deck < 1e-5 && mu < 1e-6, "deck max " + g(deck) + " (< 1e-5), mu_a max " + g(mu) + " (< 1e-6)"};
  });

  criterion(2, "flow-line minimality on the lattice", 120, [&] {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> U(0, 1);
    GridOptions o;
    o.h = 0.05;
    int bad = 0;
    double worst = 0, kappa = 0;
    for (int i = 0; i < 20; ++i) {
      const Vec3 p(U(rng) - 0.5, U(rng) - 0.5, 4 * U(rng) - 2);
      const double L = 1 + 9 * U(rng);
      const DistanceResult d = grid_distance(p, p + Vec3(0, 0, L), level, o);
      kappa = d.kappa;
      worst = std::max(worst, std::abs(d.upper_bound / L - 1));
      bad += d.upper_bound < (1 - d.kappa) * L || d.upper_bound > (1 + d.kappa) * L;
    }
    return Outcome{bad == 0 && kappa <= 0.10,
                   std::to_string(bad) + "/20 outside (1 +- kappa)|dt|, max rel dev " + g(worst) + ", kappa " + g(kappa)};
  });

  criterion(3, "yt-plane oracle agreement", 120, [&] {
    std::mt19937_64 rng(30);
    std::uniform_real_distribution<double> U(-1, 1);
    int bad = 0, n = 0;
    double worst = 0;
    for (double lam : {std::exp(1.0), (3 + std::sqrt(5.0)) / 2}) {
      const MetricField s = MetricField::solv(lam);
      for (int i = 0; i < 25; ++i, ++n) {
        const Vec3 p(0, U(rng), U(rng)), q(0, U(rng), U(rng));
        const DistanceResult d = grid_distance(p, q, s);
        const double ex = yt_distance(p, q, lam);
        const double rel = std::abs(d.value - ex) / ex;
        worst = std::max(worst, rel);
        bad += rel > d.kappa;
      }
    }
    return Outcome{bad == 0 && n == 50, std::to_string(bad) + "/" + std::to_string(n) + " beyond kappa, max rel " + g(worst)};
  });

  criterion(4, "inequality e4 on the orbit through (0, 2 r_tube, 0)", 180, [&] {
    RunConfig c = cfg;
    c.solver.e4_t_grid = {1, 2, 5, 10, 20, 30};
    c.solver.e4_h = 0.02;
    const StageResult r = run_verify_e4(c);
    const auto& e = r.report["e4"];
    return Outcome{r.pass(), std::to_string(e["violations"].get<int>()) + " violations over " +
                                 std::to_string(e["rows"].size()) + " rows, k' = " + g(e["k_prime"].get<double>())};
  });

  criterion(5, "prop_key scan over the boundary torus", 600, [&] {
    const StageResult r = run_verify_keyprop(cfg);
    const auto& q = r.report["qg"];
    const auto& in = q["inputs"];
    const int good = int(in["n_good_samples"]["value"].get<double>());
    const double s1 = in["s1"]["value"].get<double>(), s2 = in["s2"]["value"].get<double>();
    const bool ok = r.pass() && good >= 50 && std::isfinite(s1) && std::isfinite(s2);
    return Outcome{ok, std::to_string(good) + " good samples, " + std::to_string(q["n_rows"].get<std::size_t>()) +
                           " rows, " + std::to_string(q["violations"].get<int>()) + " violations, C = " +
                           g(q["C"].get<double>()) + ", c = " + g(q["c"].get<double>()) + ", s1 = " + g(s1) +
                           ", s2 = " + g(s2)};
  });

  criterion(6, "geodesic flow minimality (Sasaki)", 60, [&] {
    std::mt19937_64 rng(60);
    std::uniform_real_distribution<double> U(0, 1);
    int viol = 0, n = 0;
    double gap = 0;
    for (int i = 0; i < 5; ++i) {
      const Vec2 p(2 * U(rng) - 1, 0.5 + U(rng));
      const double a = 2 * M_PI * U(rng);
      const MinimalityReport m = verify_flowline_minimality(p, Vec2(std::cos(a), std::sin(a)), 3.0, 100, 600 + i);
      viol += m.violations;
      n += m.n_competitors * int(m.amplitudes.size());
      gap = std::max(gap, m.zero_amplitude_gap);
    }
    return Outcome{viol == 0 && gap <= 1e-8, std::to_string(viol) + " violations over " + std::to_string(n) +
                                                  " competitors, zero-amplitude gap " + g(gap)};
  });

  criterion(7, "constant arithmetic", 1, [&] {
    const auto t = transfer_constants(2, 1, 3, 1);
    const auto c = compose_constants(3, 1, 2, 1);
    const auto k = prop_key_constants(2, 1, 0.5, 3);
    const bool ok = t == std::pair<double, double>(6, 4) && c == std::pair<double, double>(20, 7) &&
                    k == std::pair<double, double>(2, 6);
    return Outcome{ok, "transfer (" + g(t.first) + ", " + g(t.second) + "), compose (" + g(c.first) + ", " +
                           g(c.second) + "), key (" + g(k.first) + ", " + g(k.second) + ")"};
  });

  criterion(8, "gluing hypothesis", 60, [&] {
    const GluedManifoldModel fw = GluedManifoldModel::franks_williams(plug, GluingMap::quarter_turn());
    const BoundaryFoliationModel fA(fw.plugs()[0]), fR(fw.plugs()[1]);
    const double a = pushed_foliation_angle(GluingMap::quarter_turn(), fR, fA);
    const double id = pushed_foliation_angle(GluingMap::identity(), fR, fA);
    const bool dis = delta_disjointness(GluingMap::quarter_turn(), fR, fA, 0.05, 0.05);
    return Outcome{a > 0.02 && id < 0.02 && dis, "quarter turn " + g(a) + " rad, identity " + g(id) +
                                                     " rad, disjoint at 0.05: " + (dis ? "yes" : "no")};
  });

  criterion(9, "cross-orbit certificates", 900, [&] {
    const StageResult r = run_verify_gluing(cfg);
    std::string d;
    for (const auto& c : r.checks) d += c.name + ": " + c.detail + "; ";
    return Outcome{r.pass(), d + std::to_string(r.report["n_certificates"].get<std::size_t>()) + " certificates"};
  });

  criterion(10, "determinism of verify-e4", 60, [&] {
    const StageResult a = run_verify_e4(cfg), b = run_verify_e4(cfg);
    const bool same = a.csv == b.csv && !a.csv.empty();
    return Outcome{same, same ? "CSV bodies byte-identical" : "CSV bodies differ"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures;
}
