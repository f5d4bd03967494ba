#include "rhosi/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rhosi/metrics.hpp"
#include "rhosi/pwl.hpp"

namespace rhosi {

namespace {

using conic::Expr;
using conic::Var;

double dist_pow(double d, double beta) { return std::pow(d, -0.5 * beta); }

void check_slot(const SlotCoefficients& c, int k) {
  if (k < 0 || k >= c.K) throw ArgumentError("user index out of range");
}

double served_floor() { return 1e-9; }

}  // namespace

SlotCoefficients lambda_upsilon_coefficients(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                                             const ScenarioConfig& cfg) {
  const int K = static_cast<int>(chs.bs_user.size());
  const int M = static_cast<int>(chs.bs_rhs.rows());
  if (static_cast<int>(beams.size()) != K) throw ArgumentError("one beam per user expected");
  if (phases.theta.size() != M) throw ArgumentError("phase vector length mismatch");
  const auto& g = chs.geo;
  const double PL = cfg.path_gain_ref, beta = cfg.path_loss_exp, gj = cfg.jam_power;
  const CMat Ht = chs.bs_rhs / std::sqrt(path_gain(g.d_br, PL, beta));
  const CVec hjr = chs.jam_rhs / std::sqrt(path_gain(g.d_jr, PL, beta));
  const CVec& th = phases.theta;

  SlotCoefficients c;
  c.K = K;
  c.noise_power = cfg.noise_power;
  c.lambda_bs.assign(K, std::vector<double>(K));
  c.upsilon_bs = c.lambda_bs;
  c.iota = c.lambda_bs;
  c.lambda_jam.resize(K);
  c.upsilon_jam.resize(K);
  c.varpi.resize(K);
  for (int k = 0; k < K; ++k) {
    const CVec hr = chs.rhs_user[k] / std::sqrt(path_gain(g.d_rk.at(k), PL, beta));
    const CVec row = hr.conjugate().cwiseProduct(th);
    const Eigen::RowVectorXcd casc = PL * (row.transpose() * Ht);
    for (int i = 0; i < K; ++i) {
      const cd a = (casc * beams[i])(0);
      const cd d = chs.bs_user[k].dot(beams[i]);
      c.lambda_bs[k][i] = std::norm(a);
      c.upsilon_bs[k][i] = 2.0 * std::real(a * std::conj(d));
      c.iota[k][i] = std::norm(d);
    }
    const cd jc = PL * row.cwiseProduct(hjr).sum();
    c.lambda_jam[k] = gj * std::norm(jc);
    c.upsilon_jam[k] = 2.0 * gj * std::real(jc * std::conj(chs.jam_user[k]));
    c.varpi[k] = gj * std::norm(chs.jam_user[k]) + cfg.noise_power;
  }
  const CVec arow = chs.rhs_target_steer.conjugate().cwiseProduct(th);
  const Eigen::RowVectorXcd er = std::sqrt(PL) * (arow.transpose() * Ht);
  for (const auto& w : beams) c.lambda_rt += std::norm((er * w)(0));
  const cd ej = std::sqrt(PL) * arow.cwiseProduct(hjr).sum();
  c.lambda_jt = gj * std::norm(ej);
  c.upsilon_jt = 2.0 * gj * std::real(ej * std::conj(chs.jam_target));
  c.varpi_t = gj * std::norm(chs.jam_target) + cfg.noise_power;
  return c;
}

double surrogate_sinr(const SlotCoefficients& c, int k, double x, double y) {
  check_slot(c, k);
  double sig = 0.0, intf = 0.0;
  for (int i = 0; i < c.K; ++i) {
    const double p = x * x * c.lambda_bs[k][i] + x * c.upsilon_bs[k][i] + c.iota[k][i];
    (i == k ? sig : intf) += p;
  }
  intf += y * y * c.lambda_jam[k] + y * c.upsilon_jam[k] + c.varpi[k];
  return sig / intf;
}

double surrogate_echo_sinr(const SlotCoefficients& c, double cpow, double dpow) {
  return cpow * cpow * c.lambda_rt / (dpow * dpow * c.lambda_jt + dpow * c.upsilon_jt + c.varpi_t);
}

double air_distance(const Vec2& q, const Vec2& ground, double altitude) {
  return std::sqrt((q - ground).squaredNorm() + altitude * altitude);
}

double product_bound_upper(const Vec2& q, const Vec2& anchor, const Vec2& e1, const Vec2& e2, double altitude) {
  const double d1 = air_distance(q, e1, altitude), d2 = air_distance(q, e2, altitude);
  const double a1 = air_distance(anchor, e1, altitude), a2 = air_distance(anchor, e2, altitude);
  return 0.5 * (d1 + d2) * (d1 + d2) - 0.5 * (a1 * a1 + a2 * a2) - (2.0 * anchor - e1 - e2).dot(q - anchor);
}

double product_bound_lower(const Vec2& q, const Vec2& anchor, const Vec2& e1, const Vec2& e2, double altitude) {
  const double a1 = air_distance(anchor, e1, altitude), a2 = air_distance(anchor, e2, altitude);
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw GeometryError("anchor coincides with a ground point at zero altitude");
  const Vec2 u = (anchor - e1) / a1 + (anchor - e2) / a2;
  const double d1 = air_distance(q, e1, altitude), d2 = air_distance(q, e2, altitude);
  return 0.5 * (a1 + a2) * (a1 + a2) + (a1 + a2) * u.dot(q - anchor) - 0.5 * (d1 * d1 + d2 * d2);
}

double power_tangent(double x, double x0, double p) {
  return std::pow(x0, -p) - p * std::pow(x0, -p - 1.0) * (x - x0);
}

double quadratic_tangent(double a, double a0, double lambda, double upsilon, double c) {
  return a0 * a0 * lambda + a0 * upsilon + c + (2.0 * a0 * lambda + upsilon) * (a - a0);
}

double echo_margin_bound(double c, double d, double c0, const SlotCoefficients& co, double gamma) {
  return (c0 * c0 + 2.0 * c0 * (c - c0)) * co.lambda_rt -
         gamma * (d * d * co.lambda_jt + d * co.upsilon_jt + co.varpi_t);
}

double echo_margin(double c, double d, const SlotCoefficients& co, double gamma) {
  return c * c * co.lambda_rt - gamma * (d * d * co.lambda_jt + d * co.upsilon_jt + co.varpi_t);
}

double induced_factor(const Vec2& v, double v0) {
  const double s = v.squaredNorm() / (v0 * v0);
  return std::sqrt(std::sqrt(1.0 + 0.25 * s * s) - 0.5 * s);
}

double f_bound(double aleph, const Vec2& v, double aleph0, const Vec2& v_anchor, double v0) {
  return 2.0 * aleph0 * (aleph - aleph0) + aleph0 * aleph0 + 2.0 / (v0 * v0) * v_anchor.dot(v - v_anchor) +
         v_anchor.squaredNorm() / (v0 * v0);
}

TrajectoryOptions trajectory_options(const ScenarioConfig& cfg) {
  TrajectoryOptions o;
  o.max_iter = cfg.algo.sca_max_iter;
  o.tol = cfg.algo.sca_tol;
  o.trust_radius = cfg.algo.trust_radius;
  o.slack_weight = cfg.algo.traj_slack_weight;
  o.conic_tol = cfg.algo.conic_tol;
  o.conic_max_iter = cfg.algo.conic_max_iter;
  o.feas_tol = cfg.algo.feas_tol;
  return o;
}

TrajectoryProblem build_trajectory_subproblem(const TrajectoryIterate& it, const std::vector<SlotCoefficients>& co,
                                              const ScenarioConfig& cfg, const TrajectoryOptions& opt) {
  const int N = static_cast<int>(it.q.size());
  if (N == 0) throw ArgumentError("empty horizon");
  if (static_cast<int>(it.v.size()) != N || static_cast<int>(co.size()) != N ||
      static_cast<int>(it.aleph.size()) != N || static_cast<int>(it.trust.size()) != N) {
    throw ArgumentError("per-slot anchor sizes disagree");
  }
  TrajectoryProblem tp;
  auto& p = tp.problem;
  const double P = tp.pos_scale;
  const double V = cfg.v_max;
  tp.vel_scale = V;
  const double beta = cfg.path_loss_exp, pw = 2.0 / beta;
  const double ell = cfg.uav_altitude / P;
  const double gamma = cfg.echo_sinr_min;
  const auto& ae = cfg.aero;
  const double v0 = ae.mean_induced_velocity;
  const double tip = ae.blade_angular_speed * ae.rotor_radius;
  const double c_prof = ae.blade_power * 3.0 * V * V / (tip * tip);
  const double c_par = 0.5 * ae.fuselage_drag_ratio * ae.air_density * ae.rotor_solidity * ae.disc_area * V * V * V;
  const int K = cfg.num_users;

  const Vec2 zB = cfg.bs_pos / P, zJ = cfg.jammer_pos / P;
  std::vector<Vec2> zU;
  for (const auto& u : cfg.user_pos) zU.push_back(u / P);

  // Breakpoints of the bracket and rate interpolants around a unit anchor.
  const auto hi_bps = pwl::geometric_breakpoints(1.0, 1.1, 5, 0.5, 2.0);
  auto inv_pow = [pw](double x) { return std::pow(x, -pw); };
  auto log2p1 = [](double x) { return std::log2(1.0 + x); };

  Expr aero_sum, slack_sum;
  tp.q.resize(N);
  tp.v.resize(N);
  tp.aleph.resize(N);
  tp.kappa.assign(N, {});
  tp.chi.assign(N, {});
  for (int n = 0; n < N; ++n) {
    const std::string s = std::to_string(n);
    const Vec2 zt = it.q[n] / P;
    const Vec2 ut = it.v[n] / V;
    auto& z = tp.q[n];
    auto& u = tp.v[n];
    z = {p.add_var("z" + s + "x"), p.add_var("z" + s + "y")};
    u = {p.add_var("u" + s + "x"), p.add_var("u" + s + "y")};
    auto dz = [&](int c) { return Expr(z[c]) - zt(c); };

    if (it.trust[n] > 0.0) {
      const double r = it.trust[n] / P;
      for (int c = 0; c < 2; ++c) {
        p.add_leq(dz(c), r, "trust");
        p.add_leq(-dz(c), r, "trust");
      }
    } else {
      p.add_eq(dz(0), "freeze");
      p.add_eq(dz(1), "freeze");
    }
    p.add_soc(cfg.service_radius / P, {Expr(z[0]), Expr(z[1])}, "19e");
    p.add_soc(1.0, {Expr(u[0]), Expr(u[1])}, "19h");

    // Distance variables sigma >= ||(z - e, ell)||.
    auto dist_var = [&](const Vec2& e, const std::string& tag) {
      Var sv = p.add_nonneg("s" + tag + s);
      p.add_soc(sv, {Expr(z[0]) - e(0), Expr(z[1]) - e(1), Expr(ell)}, "dist");
      return sv;
    };
    auto anchor_dist = [&](const Vec2& e) { return std::sqrt((zt - e).squaredNorm() + ell * ell); };
    // Brackets lo <= P(z)/P(anchor) <= hi of the normalized distance product of
    // the air links to e1 and e2, returned as (lo, hi) powers (.)^(-beta/2).
    auto product_brackets = [&](Var s1, Var s2, const Vec2& e1, const Vec2& e2, const std::string& tag) {
      const double a1 = anchor_dist(e1), a2 = anchor_dist(e2);
      const double Pt = a1 * a2;
      Var lo = p.add_nonneg("lo" + tag);
      Var hi = p.add_nonneg("hi" + tag);
      // (s1 + s2)^2 <= 2 Pt (1 - pw (lo - 1)) + a1^2 + a2^2 + 2 (2 zt - e1 - e2)^T (z - zt)
      const Vec2 g = 2.0 * zt - e1 - e2;
      Expr U = 2.0 * Pt * (1.0 + pw) + a1 * a1 + a2 * a2;
      U.add(lo, -2.0 * Pt * pw);
      U += 2.0 * g(0) * dz(0) + 2.0 * g(1) * dz(1);
      p.add_rsoc(U, 1.0, {Expr(s1) + Expr(s2)}, "bracket_lo");
      // ||z - e1||^2 + ||z - e2||^2 <= (a1 + a2)^2 + 2 (a1 + a2) w^T (z - zt) - 2 ell^2 - 2 r Pt
      Var r = p.add_nonneg("r" + tag);
      pwl::add_convex_epigraph(p, r, hi, inv_pow, hi_bps, "br" + tag);
      const Vec2 w = (zt - e1) / a1 + (zt - e2) / a2;
      Expr W = (a1 + a2) * (a1 + a2) - 2.0 * ell * ell;
      W += 2.0 * (a1 + a2) * (w(0) * dz(0) + w(1) * dz(1));
      W.add(r, -2.0 * Pt);
      p.add_rsoc(W, 1.0,
                 {Expr(z[0]) - e1(0), Expr(z[1]) - e1(1), Expr(z[0]) - e2(0), Expr(z[1]) - e2(1)}, "bracket_hi");
      return std::pair<Var, Var>{lo, hi};
    };

    const Var sBR = dist_var(zB, "br");
    const Var sJR = dist_var(zJ, "jr");
    const auto& c = co[n];

    // Communication: sum of interpolated rates >= R_min - slack.
    Expr rate_sum;
    bool any_served = false;
    tp.kappa[n].assign(K, Var{});
    tp.chi[n].assign(K, Var{});
    for (int k = 0; k < K; ++k) {
      const double kt = it.kappa[n][k];
      if (!(kt >= served_floor())) continue;
      any_served = true;
      const std::string ks = s + "_" + std::to_string(k);
      const Var sRk = dist_var(zU[k], "r" + std::to_string(k) + "_");
      const auto [alo, ahi] = product_brackets(sRk, sBR, zU[k], zB, "a" + ks);
      const auto [blo, bhi] = product_brackets(sRk, sJR, zU[k], zJ, "b" + ks);
      const double xt = dist_pow(anchor_dist(zU[k]) * P * anchor_dist(zB) * P, beta);
      const double yt = dist_pow(anchor_dist(zU[k]) * P * anchor_dist(zJ) * P, beta);
      const double vp = c.varpi[k];
      const double Ls = c.lambda_bs[k][k] * xt * xt / vp, Us = c.upsilon_bs[k][k] * xt / vp;
      const double S1 = Ls + Us + c.iota[k][k] / vp;
      const double slope = 2.0 * Ls + Us;
      Expr S = S1 - slope;
      S.add(slope >= 0.0 ? alo : ahi, slope);

      const Var kap = p.add_nonneg("kappa" + ks);
      const Var chi = p.add_nonneg("chi" + ks);
      tp.kappa[n][k] = kap;
      tp.chi[n][k] = chi;
      const double ct = it.chi[n][k];
      p.add_rsoc(S, 1.0, {std::sqrt(kt / (2.0 * ct)) * Expr(chi), std::sqrt(ct / (2.0 * kt)) * Expr(kap)}, "amgm");

      double Li = 0.0, Ui = 0.0, Ii = 0.0;
      for (int i = 0; i < K; ++i) {
        if (i == k) continue;
        Li += c.lambda_bs[k][i] * xt * xt / vp;
        Ui += c.upsilon_bs[k][i] * xt / vp;
        Ii += c.iota[k][i] / vp;
      }
      const double Lj = c.lambda_jam[k] * yt * yt / vp, Uj = c.upsilon_jam[k] * yt / vp;
      const Var phi = p.add_var("phi" + ks);
      const Var psi = p.add_var("psi" + ks);
      auto quad_epi = [&](Var t, Var a, double L, double Ul) {
        if (L > 0.0) {
          p.add_rsoc(Expr(t) - Ul * Expr(a), 1.0, {std::sqrt(L) * Expr(a)}, "quad");
        } else {
          p.add_geq(Expr(t) - Ul * Expr(a), "quad");
        }
      };
      quad_epi(phi, alo, Li, Ui);
      quad_epi(phi, ahi, Li, Ui);
      quad_epi(psi, blo, Lj, Uj);
      quad_epi(psi, bhi, Lj, Uj);
      p.add_geq(Expr(chi) - Expr(phi) - Expr(psi) - (Ii + 1.0), "interference");

      const Var t = p.add_nonneg("rate" + ks);
      pwl::add_concave_hypograph(p, t, kap, log2p1,
                                 pwl::geometric_breakpoints(kt, 1.6, 6, 0.0, kt * std::pow(1.6, 6)), "rate" + ks);
      rate_sum.add(t, 1.0);
    }
    const Var sr = p.add_nonneg("slack_rate" + s);
    if (any_served || cfg.rate_min > 0.0) {
      p.add_geq(rate_sum - cfg.rate_min - Expr(sr), "19c");
    }
    slack_sum.add(sr, 1.0);

    // Sensing: c^2 lambda_rt linearized at the anchor, jamming at both ends of the d-bracket.
    if (gamma > 0.0) {
      const double aBR = anchor_dist(zB), aJR = anchor_dist(zJ);
      const Var clo = p.add_nonneg("clo" + s);
      p.add_leq(Expr(sBR) * (1.0 / aBR), 1.0 - pw * (Expr(clo) - 1.0), "echo_c");
      const Var dlo = p.add_nonneg("dlo" + s);
      p.add_leq(Expr(sJR) * (1.0 / aJR), 1.0 - pw * (Expr(dlo) - 1.0), "echo_d");
      const Var dhi = p.add_nonneg("dhi" + s);
      const Var rd = p.add_nonneg("rd" + s);
      pwl::add_convex_epigraph(p, rd, dhi, inv_pow, hi_bps, "rd" + s);
      const Vec2 wj = (zt - zJ) / aJR;
      p.add_leq(Expr(rd), 1.0 + (wj(0) * dz(0) + wj(1) * dz(1)) * (1.0 / aJR), "echo_d_hi");

      const double ct = dist_pow(aBR * P, beta), dt = dist_pow(aJR * P, beta);
      const double sc = 1.0 / (gamma * c.varpi_t);
      const double Lr = c.lambda_rt * ct * ct * sc;
      const double Lj = c.lambda_jt * dt * dt / c.varpi_t, Uj = c.upsilon_jt * dt / c.varpi_t;
      const Var psiT = p.add_var("psiT" + s);
      for (Var d : {dlo, dhi}) {
        if (Lj > 0.0) {
          p.add_rsoc(Expr(psiT) - Uj * Expr(d), 1.0, {std::sqrt(Lj) * Expr(d)}, "quad");
        } else {
          p.add_geq(Expr(psiT) - Uj * Expr(d), "quad");
        }
      }
      const Var se = p.add_nonneg("slack_echo" + s);
      p.add_geq(Lr * (2.0 * Expr(clo) - 1.0) - Expr(psiT) - 1.0 - Expr(se), "19d");
      slack_sum.add(se, 1.0);
    }

    // Rotor power: profile, parasite through kappa_c >= tau^3, induced through aleph.
    const Var qv = p.add_nonneg("prof" + s);
    p.add_rsoc(qv, 1.0, {Expr(u[0]), Expr(u[1])}, "profile");
    const Var tau = p.add_nonneg("tau" + s);
    p.add_soc(tau, {Expr(u[0]), Expr(u[1])}, "speed");
    const Var om = p.add_nonneg("omega" + s);
    p.add_rsoc(om, 1.0, {Expr(tau)}, "square");
    const Var cub = p.add_nonneg("cube" + s);
    p.add_rsoc(cub, tau, {Expr(om)}, "cube");
    const Var al = p.add_nonneg("aleph" + s);
    tp.aleph[n] = al;
    const Var m = p.add_nonneg("m" + s);
    p.add_rsoc(al, m, {Expr(1.0)}, "induced_inv");
    const double a0 = it.aleph[n];
    Expr F = a0 * a0 - 2.0 * a0 * a0 + V * V * ut.squaredNorm() / (v0 * v0);
    F.add(al, 2.0 * a0);
    const double gv = 2.0 * V * V / (v0 * v0);
    F += gv * ut(0) * (Expr(u[0]) - ut(0)) + gv * ut(1) * (Expr(u[1]) - ut(1));
    p.add_rsoc(F, 1.0, {Expr(m)}, "induced");

    Expr aero = ae.blade_power;
    aero.add(qv, c_prof);
    aero.add(cub, c_par);
    aero.add(al, ae.induced_power);
    aero_sum += aero;
  }

  // Kinematics across slots.
  const double step = cfg.slot_duration * V / P;
  for (int n = 0; n + 1 < N; ++n) {
    const auto& z0 = tp.q[n];
    const auto& z1 = tp.q[n + 1];
    const auto& u0 = tp.v[n];
    const auto& u1 = tp.v[n + 1];
    const double sp = it.v[n].norm();
    const Vec2 dir = sp > 1e-9 ? Vec2(it.v[n] / sp) : Vec2(1.0, 0.0);
    p.add_soc(step * (dir(0) * Expr(u0[0]) + dir(1) * Expr(u0[1])),
              {Expr(z1[0]) - Expr(z0[0]), Expr(z1[1]) - Expr(z0[1])}, "19f");
    p.add_soc(cfg.a_max * cfg.slot_duration / V, {Expr(u1[0]) - Expr(u0[0]), Expr(u1[1]) - Expr(u0[1])}, "19g");
  }

  tp.aero = aero_sum * (1.0 / N);
  p.minimize(tp.aero - slack_sum * (opt.slack_weight / N));
  return tp;
}

Trajectory initial_trajectory(const ScenarioConfig& cfg) {
  const int N = cfg.horizon_slots;
  if (N <= 0) throw ArgumentError("horizon must be positive");
  const double s = min_power_speed(cfg.aero, cfg.v_max);
  Trajectory t;
  t.q.assign(N, Vec2(0.0, 0.0));
  t.v.assign(N, Vec2(s, 0.0));
  return t;
}

namespace {

// Worst normalized rate/echo slack of one slot at the given position.
double slot_comm_slack(const ScenarioConfig& cfg, const Vec2& q, int n, const PhaseConfig& pc, const Beams& w) {
  const auto ch = assemble_channels(cfg, q, n);
  const double r = (sum_rate(comm_sinrs(ch, pc, w, cfg)) - cfg.rate_min) / std::max(cfg.rate_min, 1.0);
  double worst = r;
  if (cfg.echo_sinr_min > 0.0) {
    worst = std::min(worst, (echo_sinr(ch, pc, w, cfg) - cfg.echo_sinr_min) / cfg.echo_sinr_min);
  }
  return worst;
}

}  // namespace

TrajectoryResult solve_trajectory_sca(const ScenarioConfig& cfg, const std::vector<PhaseConfig>& phases,
                                      const std::vector<Beams>& beams, const Trajectory& start,
                                      const TrajectoryOptions& opt) {
  const int N = static_cast<int>(start.q.size());
  if (N == 0 || static_cast<int>(start.v.size()) != N || static_cast<int>(phases.size()) != N ||
      static_cast<int>(beams.size()) != N) {
    throw ArgumentError("trajectory, phases and beams must cover the same slots");
  }
  const double v0 = cfg.aero.mean_induced_velocity;
  TrajectoryResult res;
  res.traj = start;
  std::vector<double> trust(N, opt.optimize_positions ? opt.trust_radius : 0.0);
  std::vector<char> frozen(N, 0);
  std::vector<double> base_slack(N);
  for (int n = 0; n < N; ++n) base_slack[n] = slot_comm_slack(cfg, start.q[n], n, phases[n], beams[n]);

  conic::SolverOptions so;
  so.tol = opt.conic_tol;
  so.max_iter = opt.conic_max_iter;
  double prev = std::numeric_limits<double>::infinity();

  auto mean_aero = [&](const Trajectory& t) {
    double s = 0.0;
    for (const auto& v : t.v) s += aero_power(v, cfg.aero);
    return s / N;
  };

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    TrajectoryIterate it;
    it.q = res.traj.q;
    it.v = res.traj.v;
    it.trust = trust;
    std::vector<SlotCoefficients> co;
    it.kappa.assign(N, std::vector<double>(cfg.num_users, 0.0));
    it.chi = it.kappa;
    for (int n = 0; n < N; ++n) {
      it.aleph.push_back(induced_factor(it.v[n], v0));
      const auto ch = assemble_channels(cfg, it.q[n], n);
      co.push_back(lambda_upsilon_coefficients(ch, phases[n], beams[n], cfg));
      const auto& c = co.back();
      const auto& g = ch.geo;
      for (int k = 0; k < cfg.num_users; ++k) {
        const double xk = dist_pow(g.d_rk[k] * g.d_br, cfg.path_loss_exp);
        const double yk = dist_pow(g.d_rk[k] * g.d_jr, cfg.path_loss_exp);
        const double sinr = surrogate_sinr(c, k, xk, yk);
        double intf = yk * yk * c.lambda_jam[k] + yk * c.upsilon_jam[k] + c.varpi[k];
        for (int i = 0; i < cfg.num_users; ++i) {
          if (i != k) intf += xk * xk * c.lambda_bs[k][i] + xk * c.upsilon_bs[k][i] + c.iota[k][i];
        }
        it.kappa[n][k] = sinr;
        it.chi[n][k] = intf / c.varpi[k];
      }
    }

    bool accepted = false;
    Trajectory cand;
    double obj = 0.0;
    std::vector<double> aleph(N);
    for (int round = 0; round < 4 && !accepted; ++round) {
      const auto tp = build_trajectory_subproblem(it, co, cfg, opt);
      const auto sol = conic::solve(tp.problem, so);
      if (!sol.usable(1e-6)) break;
      cand.q.resize(N);
      cand.v.resize(N);
      for (int n = 0; n < N; ++n) {
        cand.q[n] = tp.pos_scale * Vec2(sol.value(tp.q[n][0]), sol.value(tp.q[n][1]));
        cand.v[n] = tp.vel_scale * Vec2(sol.value(tp.v[n][0]), sol.value(tp.v[n][1]));
        if (it.trust[n] <= 0.0) cand.q[n] = it.q[n];
        aleph[n] = sol.value(tp.aleph[n]);
      }
      bool bad = false;
      for (int n = 0; n < N; ++n) {
        if (it.trust[n] <= 0.0) continue;
        const double s = slot_comm_slack(cfg, cand.q[n], n, phases[n], beams[n]);
        if (s < std::min(0.0, base_slack[n]) - 1e-9) {
          it.trust[n] = 0.0;
          trust[n] = 0.0;
          if (!frozen[n]) {
            frozen[n] = 1;
            ++res.frozen_slots;
          }
          bad = true;
        }
      }
      if (!bad) {
        accepted = true;
        obj = sol.objective;
      }
    }
    if (!accepted) break;
    const double true_before = mean_aero(res.traj);
    const double true_after = mean_aero(cand);
    if (true_after > true_before) break;
    res.traj = cand;
    res.aleph = aleph;
    res.trace.push_back(obj);
    res.aero_trace.push_back(true_after);
    res.iterations = iter + 1;
    for (int n = 0; n < N; ++n) base_slack[n] = slot_comm_slack(cfg, res.traj.q[n], n, phases[n], beams[n]);
    if (std::abs(prev - obj) <= opt.tol * std::max(1.0, std::abs(obj))) break;
    prev = obj;
  }
  res.aero.resize(N);
  for (int n = 0; n < N; ++n) res.aero[n] = aero_power(res.traj.v[n], cfg.aero);
  return res;
}

}  // namespace rhosi
