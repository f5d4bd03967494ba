#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhosi/bench.hpp"
#include "rhosi/conic.hpp"
#include "rhosi/rhosi.hpp"

using namespace rhosi;

namespace {

using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr int kMonotoneSeeds = 20;
constexpr double kMonotoneRelTol = 1e-6;
constexpr double kConvergeRelTol = 1e-4;
constexpr int kMaxOuter = 20;
constexpr double kRunSeconds = 600.0;
constexpr int kSweepSeeds = 10;
constexpr int kSweepSlots = 2;
constexpr double kFig2Curvature = 0.01;  // [W], allowed negative second difference
constexpr double kFig3Curvature = 0.01;  // [bps/Hz]
constexpr double kOracleRatio = 1.05;
constexpr double kOracleRefine = 0.02;
constexpr int kSamples = 10000;
constexpr double kSoundTol = 1e-9;
constexpr double kAlephTol = 1e-4;
constexpr double kConicObjTol = 1e-6;
constexpr double kKktTol = 1e-7;
constexpr double kRankOneTol = 1e-12;
constexpr double kDoublingTol = 1e-9;
constexpr double kModulusTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string join(const std::vector<double>& v, const char* f = "%.4f") {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(f, v[i]);
  return s;
}

ScenarioConfig with_horizon(ScenarioConfig cfg, int N) {
  cfg.horizon_slots = N;
  cfg.total_time = N * cfg.slot_duration;
  return cfg;
}

// Phases returned by any run in this binary, for the unit-modulus identity.
std::vector<PhaseConfig> g_returned_phases;

void keep_phases(const SolutionBundle& s) {
  for (const auto& p : s.phases) g_returned_phases.push_back(p);
}

// ---------------------------------------------------------------------------

Outcome criterion_monotone() {
  int passed = 0;
  double worst_runtime = 0.0;
  int worst_iters = 0;
  for (int seed = 1; seed <= kMonotoneSeeds; ++seed) {
    const auto cfg = with_seed(default_scenario(), static_cast<std::uint64_t>(seed));
    auto opt = ao_options(cfg);
    opt.max_outer = kMaxOuter;
    const auto t0 = Clock::now();
    const auto tr = run_rhosi(cfg, opt);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    worst_runtime = std::max(worst_runtime, secs);
    std::string why;
    if (tr.failed) {
      why = "failed: " + tr.diagnostic;
    } else {
      keep_phases(tr.solution);
      std::vector<double> objs = {tr.initial_objective};
      for (double o : tr.objectives()) objs.push_back(o);
      const auto mono = verify_monotone(objs, kMonotoneRelTol * objs[0]);
      const int S = static_cast<int>(tr.records.size());
      worst_iters = std::max(worst_iters, S);
      const double last_change = std::abs(objs[S] - objs[S - 1]);
      bool all_feasible = true;
      for (const auto& r : tr.records) all_feasible = all_feasible && r.feasibility.feasible;
      if (!mono.first) why += "non-monotone at " + std::to_string(mono.second) + "; ";
      if (!tr.converged || S > kMaxOuter || last_change > kConvergeRelTol * objs[0]) why += "not converged; ";
      if (secs > kRunSeconds) why += "too slow; ";
      if (!all_feasible) why += "infeasible iterate; ";
      std::printf("  [1] seed %2d obj %.6f -> %.6f W in %d iterations, %.1f s%s%s\n", seed, objs[0], objs[S], S, secs,
                  why.empty() ? "" : " : ", why.c_str());
    }
    if (tr.failed) std::printf("  [1] seed %2d %s\n", seed, why.c_str());
    if (why.empty()) ++passed;
    std::fflush(stdout);
  }
  Outcome o;
  o.pass = passed == kMonotoneSeeds;
  o.summary = std::to_string(passed) + "/" + std::to_string(kMonotoneSeeds) +
              " default-scenario runs monotone (tol 1e-6 obj0), converged within 20 iterations (1e-4), worst " +
              fmt("%.1f", worst_runtime) + " s (limit 600 s), max " + std::to_string(worst_iters) + " iterations";
  return o;
}

// ---------------------------------------------------------------------------

using RowKey = std::pair<double, std::uint64_t>;

std::map<RowKey, SweepRow> index_rows(const SweepResult& r) {
  std::map<RowKey, SweepRow> m;
  for (const auto& row : r.rows) m[{row.value, row.seed}] = row;
  return m;
}

std::set<std::uint64_t> seeds_ok_everywhere(const std::vector<std::map<RowKey, SweepRow>>& sweeps,
                                            const std::vector<double>& values, int seeds) {
  std::set<std::uint64_t> out;
  for (int s = 1; s <= seeds; ++s) {
    bool ok = true;
    for (const auto& m : sweeps) {
      for (double v : values) {
        auto it = m.find({v, static_cast<std::uint64_t>(s)});
        ok = ok && it != m.end() && it->second.ok;
      }
    }
    if (ok) out.insert(static_cast<std::uint64_t>(s));
  }
  return out;
}

std::vector<double> paired_means(const std::map<RowKey, SweepRow>& m, const std::vector<double>& values,
                                 const std::set<std::uint64_t>& seeds, bool rate) {
  std::vector<double> out;
  for (double v : values) {
    double s = 0.0;
    for (auto seed : seeds) {
      const auto& r = m.at({v, seed});
      s += rate ? r.sum_rate_bpshz : r.objective_w;
    }
    out.push_back(seeds.empty() ? std::nan("") : s / static_cast<double>(seeds.size()));
  }
  return out;
}

SweepResult sweep(Axis axis, const std::vector<double>& values, Variant variant, const ScenarioConfig& base) {
  SweepSpec spec;
  spec.axis = axis;
  spec.values = values;
  spec.base = base;
  spec.seeds = kSweepSeeds;
  spec.variant = variant;
  return run_sweep(spec);
}

Outcome criterion_antennas() {
  const std::vector<double> values = {4, 5, 6, 7, 8, 9};
  auto base = with_horizon(default_scenario(), kSweepSlots);
  auto low = base;
  low.rate_min = 0.5;
  const auto hi_rows = index_rows(sweep(Axis::Antennas, values, Variant::Rhosi, base));
  const auto lo_rows = index_rows(sweep(Axis::Antennas, values, Variant::Rhosi, low));
  const auto seeds = seeds_ok_everywhere({hi_rows, lo_rows}, values, kSweepSeeds);
  const auto m1 = paired_means(hi_rows, values, seeds, false);
  const auto m05 = paired_means(lo_rows, values, seeds, false);
  std::printf("  [2] %zu/%d seeds feasible at every point of both curves\n", seeds.size(), kSweepSeeds);
  std::printf("  [2] R_min = 1   mean objective [W]: %s\n", join(m1).c_str());
  std::printf("  [2] R_min = 0.5 mean objective [W]: %s\n", join(m05).c_str());
  bool nonincreasing = !seeds.empty(), curvature = !seeds.empty(), ordered = !seeds.empty();
  for (const auto* m : {&m1, &m05}) {
    for (size_t i = 1; i < values.size(); ++i) nonincreasing = nonincreasing && (*m)[i] <= (*m)[i - 1];
    for (size_t i = 1; i + 1 < values.size(); ++i) {
      curvature = curvature && (*m)[i + 1] - 2.0 * (*m)[i] + (*m)[i - 1] >= -kFig2Curvature;
    }
  }
  for (size_t i = 0; i < values.size(); ++i) ordered = ordered && m05[i] <= m1[i];
  std::printf("  [2] non-increasing in N_t: %s; second differences >= -%.2f W: %s; R_min 0.5 <= R_min 1: %s\n",
              nonincreasing ? "yes" : "no", kFig2Curvature, curvature ? "yes" : "no", ordered ? "yes" : "no");
  Outcome o;
  o.pass = nonincreasing && curvature && ordered;
  o.summary = std::string("objective vs N_t 4..9: non-increasing ") + (nonincreasing ? "yes" : "no") +
              ", diminishing decrements " + (curvature ? "yes" : "no") + ", R_min ordering " + (ordered ? "yes" : "no") +
              " (R_min=1: " + fmt("%.3f", m1.front()) + " -> " + fmt("%.3f", m1.back()) + " W)";
  return o;
}

Outcome criterion_jamming() {
  const std::vector<double> values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto base = with_horizon(default_scenario(), kSweepSlots);
  const auto r = index_rows(sweep(Axis::JamPower, values, Variant::Rhosi, base));
  const auto d = index_rows(sweep(Axis::JamPower, values, Variant::DiscretePhases, base));
  const auto x = index_rows(sweep(Axis::JamPower, values, Variant::RandomDeployment, base));
  const auto seeds = seeds_ok_everywhere({r, d, x}, values, kSweepSeeds);
  const auto mr = paired_means(r, values, seeds, true);
  const auto md = paired_means(d, values, seeds, true);
  const auto mx = paired_means(x, values, seeds, true);
  std::printf("  [3] %zu/%d seeds feasible for every variant and point\n", seeds.size(), kSweepSeeds);
  std::printf("  [3] rhosi             sum rate [bps/Hz]: %s\n", join(mr).c_str());
  std::printf("  [3] discrete_phases   sum rate [bps/Hz]: %s\n", join(md).c_str());
  std::printf("  [3] random_deployment sum rate [bps/Hz]: %s\n", join(mx).c_str());
  bool decreasing = !seeds.empty(), flattening = !seeds.empty(), ordered = !seeds.empty();
  for (size_t i = 1; i < values.size(); ++i) decreasing = decreasing && mr[i] < mr[i - 1];
  for (size_t i = 1; i + 1 < values.size(); ++i) {
    flattening = flattening && mr[i + 1] - 2.0 * mr[i] + mr[i - 1] >= -kFig3Curvature;
  }
  std::string misordered;
  for (size_t i = 0; i < values.size(); ++i) {
    if (!(mr[i] >= md[i] && md[i] >= mx[i])) {
      ordered = false;
      misordered += " " + fmt("%g", values[i]);
    }
  }
  std::printf("  [3] strictly decreasing: %s; second differences >= -%.2f: %s; ordering at every point: %s%s%s\n",
              decreasing ? "yes" : "no", kFig3Curvature, flattening ? "yes" : "no", ordered ? "yes" : "no",
              misordered.empty() ? "" : " (violated at g_Jam =", misordered.empty() ? "" : (misordered + ")").c_str());
  Outcome o;
  o.pass = decreasing && flattening && ordered;
  o.summary = std::string("sum rate vs g_Jam 1..10 W: strictly decreasing ") + (decreasing ? "yes" : "no") +
              ", flattening " + (flattening ? "yes" : "no") + ", rhosi >= discrete >= random " +
              (ordered ? "yes" : "no") + " (rhosi " + fmt("%.3f", mr.front()) + " -> " + fmt("%.3f", mr.back()) +
              " bps/Hz)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_oracle() {
  auto cfg = default_scenario();
  cfg.num_antennas = 2;
  cfg.num_users = 1;
  cfg.num_elements = 2;
  cfg = with_seed(with_horizon(cfg, 1), 1);
  const auto tr = run_rhosi(cfg);
  Outcome o;
  if (tr.failed) {
    o.summary = "RHOSI failed on the tiny instance: " + tr.diagnostic;
    return o;
  }
  keep_phases(tr.solution);
  const double ours = tr.records.empty() ? tr.initial_objective : tr.records.back().objective;
  const auto coarse = oracle_grid_search(cfg, 8);
  const auto fine = oracle_grid_search(cfg, 16);
  if (!coarse.feasible || !fine.feasible) {
    o.summary = "oracle found no feasible grid point";
    return o;
  }
  const double refine = std::abs(coarse.objective - fine.objective) / fine.objective;
  std::printf("  [4] RHOSI %.6f W (transmit %.6f W); oracle res 8 %.6f W, res 16 %.6f W (transmit %.6f W)\n", ours,
              transmit_power(tr.solution.beams[0]), coarse.objective, fine.objective, fine.transmit);
  o.pass = ours <= kOracleRatio * fine.objective && refine <= kOracleRefine;
  o.summary = "tiny instance: RHOSI/oracle = " + fmt("%.6f", ours / fine.objective) + " (limit 1.05), refinement change " +
              fmt("%.2e", refine) + " (limit 0.02)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_soundness() {
  std::mt19937_64 g(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::map<std::string, int> bad;
  auto rel = [](double scale) { return kSoundTol * std::max(1.0, std::abs(scale)); };

  // AM-GM majorant of eps * nu.
  for (int i = 0; i < kSamples; ++i) {
    const double e = std::exp(12 * u01(g) - 6), n = std::exp(12 * u01(g) - 6);
    const double e0 = std::exp(12 * u01(g) - 6), n0 = std::exp(12 * u01(g) - 6);
    if (amgm_bound(e, n, e0, n0) < e * n - rel(e * n)) ++bad["am-gm"];
  }

  // B underestimator on a lifted default slot.
  auto cfg = with_seed(with_horizon(default_scenario(), 1), 3);
  cfg.num_elements = 6;
  const auto ch = assemble_channels(cfg, Vec2(25.0, -30.0), 0);
  std::normal_distribution<double> n01;
  Beams w;
  for (int k = 0; k < cfg.num_users; ++k) {
    CVec b(cfg.num_antennas);
    for (int i = 0; i < b.size(); ++i) b(i) = 20.0 * cd(n01(g), n01(g));
    w.push_back(b);
  }
  const auto L = lift_channels(ch, w, cfg);
  auto random_theta = [&](int M) {
    CVec t(M);
    for (int m = 0; m < M; ++m) t(m) = std::polar(1.0, 2 * kPi * u01(g));
    return t;
  };
  auto random_lift = [&](int M) {
    const int r = 1 + static_cast<int>(3 * u01(g));
    CMat out = CMat::Zero(M + 1, M + 1);
    std::vector<double> wt;
    double tot = 0.0;
    for (int i = 0; i < r; ++i) tot += wt.emplace_back(u01(g) + 1e-3);
    for (int i = 0; i < r; ++i) out += (wt[i] / tot) * augmented_lift(random_theta(M));
    return out;
  };
  for (int i = 0; i < kSamples; ++i) {
    const CMat A = random_lift(6), P = random_lift(6);
    const double b = dc_B(P, L);
    if (dc_bound_B(P, A, L) > b + rel(b)) ++bad["B"];
  }

  // Distance-product brackets.
  const auto dcfg = default_scenario();
  std::vector<Vec2> ends = {dcfg.bs_pos, dcfg.jammer_pos};
  for (const auto& p : dcfg.user_pos) ends.push_back(p);
  auto in_disk = [&]() {
    const double r = dcfg.service_radius * std::sqrt(u01(g)), a = 2 * kPi * u01(g);
    return Vec2(r * std::cos(a), r * std::sin(a));
  };
  for (int i = 0; i < kSamples; ++i) {
    const Vec2 e1 = ends[2 + i % dcfg.num_users], e2 = ends[i % 2];
    const Vec2 q = in_disk(), a = in_disk();
    const double prod = air_distance(q, e1, dcfg.uav_altitude) * air_distance(q, e2, dcfg.uav_altitude);
    if (product_bound_upper(q, a, e1, e2, dcfg.uav_altitude) < prod - kSoundTol * prod) ++bad["product upper"];
    if (product_bound_lower(q, a, e1, e2, dcfg.uav_altitude) > prod + kSoundTol * prod) ++bad["product lower"];
  }

  // Distance-power tangents, signal tangents and the echo margin.
  const double pw = 2.0 / dcfg.path_loss_exp;
  for (int i = 0; i < kSamples; ++i) {
    const double x = 0.05 + 20 * u01(g), x0 = 0.05 + 20 * u01(g);
    for (double p : {pw, 1.0, 0.5 * pw}) {
      const double f = std::pow(x, -p);
      if (power_tangent(x, x0, p) > f + rel(f)) ++bad["D power tangent"];
    }
    const double lam = 10 * u01(g), ups = 20 * u01(g) - 10, c = u01(g);
    const double qv = x * x * lam + x * ups + c;
    if (quadratic_tangent(x, x0, lam, ups, c) > qv + rel(x * x * lam + std::abs(x * ups) + c)) ++bad["D signal tangent"];
    SlotCoefficients co;
    co.K = 1;
    co.lambda_rt = 10 * u01(g);
    co.lambda_jt = 10 * u01(g);
    co.upsilon_jt = 20 * u01(g) - 10;
    co.varpi_t = u01(g);
    const double dd = 0.05 + 20 * u01(g), gam = 3 * u01(g);
    const double em = echo_margin(x, dd, co, gam);
    if (echo_margin_bound(x, dd, x0, co, gam) > em + rel(x * x * co.lambda_rt)) ++bad["E echo margin"];
  }

  // Induced-power bound.
  const double v0 = dcfg.aero.mean_induced_velocity;
  for (int i = 0; i < kSamples; ++i) {
    const double al = 2 * u01(g), al0 = 0.05 + 2 * u01(g);
    const Vec2 v(30 * u01(g) - 15, 30 * u01(g) - 15), va(30 * u01(g) - 15, 30 * u01(g) - 15);
    const double f = al * al + v.squaredNorm() / (v0 * v0);
    if (f_bound(al, v, al0, va, v0) > f + rel(f)) ++bad["F"];
  }

  // Tightness of the induced slack at returned trajectory optima.
  double worst_aleph = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto c = with_seed(with_horizon(default_scenario(), 4), seed);
    SolutionBundle sol;
    try {
      sol = initial_solution(c);
    } catch (const InfeasibleError&) {
      continue;
    }
    const auto res = solve_trajectory_sca(c, sol.phases, sol.beams, sol.traj, trajectory_options(c));
    for (size_t n = 0; n < res.aleph.size(); ++n) {
      const double a = res.aleph[n];
      const double rhs = a * a + res.traj.v[n].squaredNorm() / (v0 * v0);
      worst_aleph = std::max(worst_aleph, std::abs(1.0 / (a * a) - rhs) / rhs);
      ++checked;
    }
  }

  int total_bad = 0;
  std::string detail;
  for (const char* name : {"am-gm", "B", "product upper", "product lower", "D power tangent", "D signal tangent",
                           "E echo margin", "F"}) {
    total_bad += bad[name];
    detail += std::string(name) + " " + std::to_string(bad[name]) + ", ";
    std::printf("  [5] %-17s %d violations in %d samples\n", name, bad[name], kSamples);
  }
  std::printf("  [5] induced slack equality: worst relative gap %.3e over %d slots\n", worst_aleph, checked);
  Outcome o;
  o.pass = total_bad == 0 && checked > 0 && worst_aleph <= kAlephTol;
  o.summary = "violations: " + detail + "induced equality worst " + fmt("%.2e", worst_aleph) + " (limit 1e-4)";
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_conic() {
  using namespace rhosi::conic;
  struct Case {
    std::string name;
    std::function<Problem()> build;
    double exact;
  };
  std::mt19937_64 g(17);
  std::normal_distribution<double> n01;
  Mat B(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) B(i, j) = n01(g);
  const Mat C = B + B.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(C);
  CVec c(4);
  for (int i = 0; i < 4; ++i) c(i) = cd(n01(g), n01(g));

  std::vector<Case> cases = {
      {"lp production",
       [] {
         Problem p;
         Var a = p.add_nonneg(), b = p.add_nonneg();
         p.minimize(-3.0 * Expr(a) - 5.0 * Expr(b));
         p.add_leq(a, 4.0);
         p.add_leq(2.0 * Expr(b), 12.0);
         p.add_leq(3.0 * Expr(a) + 2.0 * Expr(b), 18.0);
         return p;
       },
       -36.0},
      {"soc norm",
       [] {
         Problem p;
         Var t = p.add_var();
         p.minimize(t);
         p.add_soc(t, {Expr(3.0), Expr(4.0)});
         return p;
       },
       5.0},
      {"soc disk",
       [] {
         Problem p;
         Var x = p.add_var(), y = p.add_var();
         p.minimize(Expr(x) + Expr(y));
         p.add_soc(1.0, {Expr(x), Expr(y)});
         return p;
       },
       -std::sqrt(2.0)},
      {"rotated soc",
       [] {
         Problem p;
         Var u = p.add_var(), x = p.add_var();
         p.minimize(u);
         p.add_eq(Expr(x) - 3.0);
         p.add_rsoc(u, 2.0, {Expr(x)});
         return p;
       },
       4.5},
      {"sdp eigenvalue",
       [&] {
         Problem p;
         int X = p.add_psd(5);
         Expr obj;
         obj.add_trace(X, -C);
         p.minimize(obj);
         Expr tr(-1.0);
         for (int i = 0; i < 5; ++i) tr.add_entry(X, i, i, 1.0);
         p.add_eq(tr);
         return p;
       },
       -es.eigenvalues()(4)},
      {"hermitian sdp",
       [&] {
         Problem p;
         auto H = p.add_hermitian_psd(4);
         p.minimize(herm_quad(H, c, -1.0));
         for (int m = 0; m < 4; ++m) p.add_eq(herm_diag(H, m) - 1.0);
         return p;
       },
       -std::pow(c.cwiseAbs().sum(), 2)},
      {"mixed lp/soc/sdp",
       [] {
         Problem p;
         Var t = p.add_var(), x = p.add_var(), y = p.add_nonneg();
         int X = p.add_psd(2);
         p.minimize(Expr(t) + Expr(y));
         p.add_soc(t, {Expr(x) - 1.0, Expr(x) - 2.0});
         p.add_eq(Expr().add_entry(X, 0, 0, 1.0) - Expr(y));
         p.add_eq(Expr().add_entry(X, 1, 0, 1.0) - 1.0);
         p.add_eq(Expr().add_entry(X, 1, 1, 1.0) - 1.0);
         return p;
       },
       1.0 + 1.0 / std::sqrt(2.0)},
  };
  bool pass = true;
  double worst_err = 0.0, worst_kkt = 0.0;
  for (const auto& cs : cases) {
    const auto s = solve_conic(cs.build());
    const double err = std::abs(s.objective - cs.exact);
    const double kkt = std::max({s.primal_residual, s.dual_residual, s.gap});
    worst_err = std::max(worst_err, err);
    worst_kkt = std::max(worst_kkt, kkt);
    const bool ok = s.ok() && err <= kConicObjTol && kkt <= kKktTol;
    pass = pass && ok;
    std::printf("  [6] %-17s objective error %.2e, KKT %.2e %s\n", cs.name.c_str(), err, kkt, ok ? "" : "(FAIL)");
  }
  double worst_rank = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 9;
    CVec v(n);
    Vec r(n);
    for (int m = 0; m < n; ++m) {
      v(m) = cd(n01(g), n01(g));
      r(m) = n01(g);
    }
    worst_rank = std::max(worst_rank, extract_rank_one(CMat(v * v.adjoint())).residual);
    worst_rank = std::max(worst_rank, extract_rank_one(Mat(r * r.transpose())).residual);
  }
  std::printf("  [6] rank-one extraction worst residual %.2e over 200 constructed inputs\n", worst_rank);
  Outcome o;
  o.pass = pass && worst_rank <= kRankOneTol;
  o.summary = "7 analytic problems: worst objective error " + fmt("%.1e", worst_err) + ", worst KKT " +
              fmt("%.1e", worst_kkt) + "; rank-one residual " + fmt("%.1e", worst_rank);
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion_identities() {
  const AeroParams a;
  const bool hover = aero_power(Vec2(0.0, 0.0), a) == a.blade_power + a.induced_power;
  double worst_cubic = 0.0;
  for (double s : {0.5, 3.0, 7.5}) worst_cubic = std::max(worst_cubic, std::abs(parasite_power(2 * s, a) / parasite_power(s, a) - 8.0));

  auto cfg = with_seed(with_horizon(default_scenario(), 1), 5);
  cfg.randomize_users = false;
  auto big = cfg;
  big.area_side *= 2;
  big.uav_altitude *= 2;
  big.bs_pos *= 2;
  big.jammer_pos *= 2;
  big.target_pos *= 2;
  for (auto& u : big.user_pos) u *= 2;
  const double f = std::pow(2.0, -cfg.path_loss_exp);
  double worst_doubling = 0.0;
  for (const Vec2 q : {Vec2(0, 0), Vec2(75, -20), Vec2(-120, 140)}) {
    const auto x = assemble_channels(cfg, q, 0);
    const auto y = assemble_channels(big, 2.0 * q, 0);
    auto check = [&](double small, double large) {
      worst_doubling = std::max(worst_doubling, std::abs(large / small / f - 1.0));
    };
    check(x.bs_rhs.squaredNorm(), y.bs_rhs.squaredNorm());
    check(x.jam_rhs.squaredNorm(), y.jam_rhs.squaredNorm());
    check(x.rhs_target.squaredNorm(), y.rhs_target.squaredNorm());
    check(std::norm(x.jam_target), std::norm(y.jam_target));
    for (int k = 0; k < cfg.num_users; ++k) {
      check(x.rhs_user[k].squaredNorm(), y.rhs_user[k].squaredNorm());
      check(x.bs_user[k].squaredNorm(), y.bs_user[k].squaredNorm());
      check(std::norm(x.jam_user[k]), std::norm(y.jam_user[k]));
    }
  }
  double worst_mod = 0.0;
  for (const auto& pc : g_returned_phases) {
    for (int m = 0; m < pc.theta.size(); ++m) worst_mod = std::max(worst_mod, std::abs(std::abs(pc.theta(m)) - 1.0));
  }
  std::printf("  [7] hover identity exact: %s; cubic ratio error %.1e; doubling law error %.1e; "
              "unit modulus error %.1e over %zu returned phase configs\n",
              hover ? "yes" : "no", worst_cubic, worst_doubling, worst_mod, g_returned_phases.size());
  Outcome o;
  o.pass = hover && worst_cubic <= 1e-12 && worst_doubling <= kDoublingTol && worst_mod <= kModulusTol &&
           !g_returned_phases.empty();
  o.summary = std::string("aero(0) = P0 + P_I exactly ") + (hover ? "yes" : "no") + ", cubic ratio error " +
              fmt("%.1e", worst_cubic) + ", 2^-beta law error " + fmt("%.1e", worst_doubling) + ", |theta| error " +
              fmt("%.1e", worst_mod);
  return o;
}

// ---------------------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_determinism(const std::string& cli) {
  SweepSpec spec;
  spec.axis = Axis::JamPower;
  spec.values = {1.0, 4.0};
  spec.base = with_horizon(default_scenario(), kSweepSlots);
  spec.seeds = 3;
  spec.variant = Variant::DiscretePhases;
  const auto a = results_csv(run_sweep(spec).rows);
  const auto b = results_csv(run_sweep(spec).rows);
  spec.workers = 2;
  const auto c = results_csv(run_sweep(spec).rows);
  bool same = a == b && a == c;
  std::printf("  [8] in-process sweeps byte-identical (1 and 2 workers): %s\n", same ? "yes" : "no");
  std::string cli_note = "command line not checked";
  if (!cli.empty()) {
    const std::string base = "rhosi_acceptance_det_";
    bool ok = true;
    std::string outs[2];
    for (int r = 0; r < 2; ++r) {
      const std::string path = base + std::to_string(r) + ".csv";
      const std::string cmd = "\"" + cli + "\" sweep --axis jam_power --values 1,4 --seeds 3 --variant rhosi "
                              "--set \"horizon_slots = 2\" --set \"total_time = 2\" --out " + path + " > /dev/null";
      ok = ok && std::system(cmd.c_str()) == 0;
      outs[r] = read_file(path);
      std::remove(path.c_str());
    }
    const bool cli_same = ok && !outs[0].empty() && outs[0] == outs[1];
    same = same && cli_same;
    cli_note = std::string("two command-line runs byte-identical ") + (cli_same ? "yes" : "no");
    std::printf("  [8] %s (%zu bytes)\n", cli_note.c_str(), outs[0].size());
  }
  Outcome o;
  o.pass = same;
  o.summary = std::string("in-process sweeps byte-identical ") + (a == b && a == c ? "yes" : "no") + ", " + cli_note;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run: one PASS/FAIL line per criterion"};
  std::vector<int> only;
  bool report = false;
  std::string cli;
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_flag("--report", report, "exit 0 once every criterion was evaluated, whatever the verdicts");
  app.add_option("--cli", cli, "path of the rhosi executable for the cross-process determinism check");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"monotone alternating optimization", criterion_monotone},
      {"objective versus antennas", criterion_antennas},
      {"sum rate versus jamming power", criterion_jamming},
      {"oracle equivalence", criterion_oracle},
      {"convexification soundness", criterion_soundness},
      {"conic solver certification", criterion_conic},
      {"model identities", criterion_identities},
      {"determinism", [&] { return criterion_determinism(cli); }},
  };
  std::vector<std::string> lines;
  int failed = 0, errors = 0;
  for (int i = 0; i < static_cast<int>(criteria.size()); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i + 1) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.summary = std::string("error: ") + e.what();
      ++errors;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failed;
    char buf[64];
    std::snprintf(buf, sizeof buf, " [%.1f s]", secs);
    lines.push_back("criterion " + std::to_string(i + 1) + " " + (o.pass ? "PASS" : "FAIL") + " " +
                    criteria[i].first + ": " + o.summary + buf);
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%d of %zu criteria failed\n", failed, lines.size());
  if (errors > 0) return 2;
  if (report) return 0;
  return failed == 0 ? 0 : 1;
}
