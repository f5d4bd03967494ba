#include "rhosi/phaseshift.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rhosi/metrics.hpp"
#include "rhosi/pwl.hpp"

namespace rhosi {

using conic::Expr;

namespace {

CVec augment(const CVec& g, cd tail) {
  CVec c(g.size() + 1);
  c.head(g.size()) = g;
  c(g.size()) = tail;
  return c;
}

double quad(const CMat& Psi, const CVec& c) { return std::max(0.0, std::real(c.dot(Psi * c))); }

}  // namespace

LiftedSet lift_channels(const ChannelSet& chs, const Beams& beams, const ScenarioConfig& cfg) {
  const int M = static_cast<int>(chs.bs_rhs.rows());
  const int Nt = static_cast<int>(chs.bs_rhs.cols());
  const int K = static_cast<int>(chs.rhs_user.size());
  if (static_cast<int>(beams.size()) != K) throw ArgumentError("lift_channels: one beam per user required");
  for (const auto& w : beams) {
    if (w.size() != Nt) throw ArgumentError("lift_channels: beam length does not match the antenna count");
  }
  if (chs.jam_rhs.size() != M || chs.rhs_target_steer.size() != M) {
    throw ArgumentError("lift_channels: RHS channel lengths disagree");
  }
  LiftedSet L;
  L.M = M;
  L.K = K;
  L.jam_power = cfg.jam_power;
  L.noise_power = cfg.noise_power;
  const cd zero(0.0, 0.0);
  for (int k = 0; k < K; ++k) {
    if (chs.rhs_user[k].size() != M || chs.bs_user[k].size() != Nt) {
      throw ArgumentError("lift_channels: user channel lengths disagree");
    }
    const CVec hr = chs.rhs_user[k].conjugate();
    L.G_bs.push_back(hr.asDiagonal() * chs.bs_rhs);
    L.G_jam.push_back(hr.cwiseProduct(chs.jam_rhs));
    std::vector<CVec> row;
    for (int i = 0; i < K; ++i) {
      row.push_back(augment(L.G_bs[k] * beams[i], chs.bs_user[k].dot(beams[i])));
    }
    L.c_bs.push_back(row);
    L.c_jam.push_back(augment(L.G_jam[k], chs.jam_user[k]));
    L.xi_bs.push_back(row[k] * row[k].adjoint());
    L.xi_jam.push_back(cfg.jam_power * L.c_jam[k] * L.c_jam[k].adjoint());
    L.varpi.push_back(cfg.jam_power * std::norm(chs.jam_user[k]) + cfg.noise_power);
  }
  const CVec a = chs.rhs_target_steer.conjugate();
  L.G_rt = a.asDiagonal() * chs.bs_rhs;
  L.G_jt = a.cwiseProduct(chs.jam_rhs);
  for (int k = 0; k < K; ++k) {
    L.c_echo.push_back(augment(L.G_rt * beams[k], zero));
    L.xi_rt.push_back(L.c_echo[k] * L.c_echo[k].adjoint());
  }
  L.c_echo_jam = augment(L.G_jt, chs.jam_target);
  L.xi_jt = cfg.jam_power * L.c_echo_jam * L.c_echo_jam.adjoint();
  L.varpi_t = cfg.jam_power * std::norm(chs.jam_target) + cfg.noise_power;
  return L;
}

CMat augmented_lift(const CVec& theta) {
  const CVec psi = augment(theta.conjugate(), cd(1.0, 0.0));
  return psi * psi.adjoint();
}

CVec theta_from_lift(const CMat& Psi) {
  const int M = static_cast<int>(Psi.rows()) - 1;
  const auto r1 = conic::extract_rank_one(Psi);
  CVec theta(M);
  const cd tail = r1.vec.size() > M ? r1.vec(M) : cd(0.0, 0.0);
  for (int m = 0; m < M; ++m) {
    const cd z = std::abs(tail) > 0.0 ? std::conj(r1.vec(m) / tail) : std::conj(r1.vec(m));
    theta(m) = std::abs(z) > 0.0 ? z / std::abs(z) : cd(1.0, 0.0);
  }
  return theta;
}

double lifted_interference(const CMat& Psi, const LiftedSet& L, int k) {
  double s = L.noise_power + L.jam_power * quad(Psi, L.c_jam.at(k));
  for (int i = 0; i < L.K; ++i) {
    if (i != k) s += quad(Psi, L.c_bs[k][i]);
  }
  return s;
}

double lifted_total(const CMat& Psi, const LiftedSet& L, int k) {
  return lifted_interference(Psi, L, k) + quad(Psi, L.c_bs.at(k).at(k));
}

double lifted_sum_rate(const CMat& Psi, const LiftedSet& L) {
  double r = 0.0;
  for (int k = 0; k < L.K; ++k) r += std::log2(lifted_total(Psi, L, k) / lifted_interference(Psi, L, k));
  return r;
}

double dc_B(const CMat& Psi, const LiftedSet& L) {
  double b = 0.0;
  for (int k = 0; k < L.K; ++k) b -= std::log2(lifted_interference(Psi, L, k));
  return b;
}

double dc_bound_B(const CMat& Psi, const CMat& anchor, const LiftedSet& L) {
  double b = dc_B(anchor, L);
  for (int k = 0; k < L.K; ++k) {
    const double i0 = lifted_interference(anchor, L, k);
    b -= (lifted_interference(Psi, L, k) - i0) / (i0 * std::numbers::ln2);
  }
  return b;
}

double spectral_penalty(const CMat& Psi, const CMat& anchor, double kappa) {
  Eigen::SelfAdjointEigenSolver<CMat> ea(0.5 * (anchor + anchor.adjoint()));
  const Eigen::Index n = anchor.rows();
  const CVec u = ea.eigenvectors().col(n - 1);
  const double lin = ea.eigenvalues()(n - 1) + std::real(u.dot((Psi - anchor) * u));
  Eigen::SelfAdjointEigenSolver<CMat> ep(0.5 * (Psi + Psi.adjoint()));
  const double nuclear = ep.eigenvalues().cwiseAbs().sum();
  return kappa * (nuclear - lin);
}

PhaseOptions phase_options(const ScenarioConfig& cfg) {
  PhaseOptions o;
  o.kappa_start = cfg.algo.kappa_start;
  o.kappa_factor = cfg.algo.kappa_factor;
  o.kappa_cap = cfg.algo.kappa_cap;
  o.rank_tol = cfg.algo.rank_tol;
  o.slack_weight = cfg.algo.phase_slack_weight;
  o.inner_max = cfg.algo.sca_max_iter;
  o.inner_tol = cfg.algo.sca_tol;
  o.conic_tol = cfg.algo.conic_tol;
  o.conic_max_iter = cfg.algo.conic_max_iter;
  return o;
}

namespace {

constexpr double kRateRatio = 1.6;
constexpr int kRateCount = 6;

}  // namespace

PhaseProblem build_phase_subproblem(const LiftedSet& L, const CMat& anchor, double kappa, const ScenarioConfig& cfg,
                                    const PhaseOptions& opt) {
  if (!(kappa > 0.0)) throw ArgumentError("penalty weight must be positive");
  const int n = L.M + 1;
  if (anchor.rows() != n || anchor.cols() != n) throw ArgumentError("anchor lift has the wrong size");
  PhaseProblem pp;
  auto& p = pp.problem;
  pp.Psi = p.add_hermitian_psd(n, "Psi");
  for (int m = 0; m < n; ++m) p.add_eq(conic::herm_diag(pp.Psi, m) - 1.0, "diag" + std::to_string(m));

  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (anchor + anchor.adjoint()));
  const CVec u = es.eigenvectors().col(n - 1);
  const double lambda1 = es.eigenvalues()(n - 1);
  Expr trace;
  for (int m = 0; m < n; ++m) trace += conic::herm_diag(pp.Psi, m);
  const double anchor_u = std::real(u.dot(anchor * u));
  pp.penalty = kappa * (trace - lambda1 - (conic::herm_quad(pp.Psi, u) - anchor_u));

  Expr objective = pp.penalty;
  if (opt.enforce_rate) {
    pp.rate_slack = p.add_nonneg("rate-slack");
    Expr lhs;
    double const_part = 0.0;
    for (int k = 0; k < L.K; ++k) {
      const double w = L.varpi[k];
      Expr total(L.noise_power / w);
      Expr interf(L.noise_power / w);
      for (int i = 0; i < L.K; ++i) {
        const Expr qi = conic::herm_quad(pp.Psi, L.c_bs[k][i], 1.0 / w);
        total += qi;
        if (i != k) interf += qi;
      }
      const Expr qj = conic::herm_quad(pp.Psi, L.c_jam[k], L.jam_power / w);
      total += qj;
      interf += qj;
      const double t0 = lifted_total(anchor, L, k) / w;
      const double i0 = lifted_interference(anchor, L, k) / w;
      const double lo = L.noise_power / w;
      const auto bps = pwl::geometric_breakpoints(std::max(t0, lo), kRateRatio, kRateCount, lo,
                                                  std::max(t0, lo) * std::pow(kRateRatio, kRateCount));
      pp.rate.push_back(p.add_var("rate" + std::to_string(k)));
      pwl::add_concave_hypograph(p, pp.rate[k], total, [](double x) { return std::log2(x); }, bps,
                                 "rate" + std::to_string(k));
      lhs += pp.rate[k];
      lhs -= (1.0 / (i0 * std::numbers::ln2)) * interf;
      const_part += -std::log2(i0) + 1.0 / std::numbers::ln2;
    }
    p.add_geq(lhs + const_part - cfg.rate_min - Expr(pp.rate_slack), "sum-rate");
    objective -= opt.slack_weight * Expr(pp.rate_slack);
  }
  if (opt.enforce_echo) {
    pp.echo_slack = p.add_nonneg("echo-slack");
    const double gamma = cfg.echo_sinr_min;
    const double scale = 1.0 / (L.varpi_t * std::max(gamma, 1.0));
    Expr echo;
    for (int k = 0; k < L.K; ++k) echo += conic::herm_quad(pp.Psi, L.c_echo[k], scale);
    echo -= conic::herm_quad(pp.Psi, L.c_echo_jam, gamma * L.jam_power * scale);
    echo -= gamma * L.noise_power * scale;
    p.add_geq(echo - Expr(pp.echo_slack), "echo");
    objective -= opt.slack_weight * Expr(pp.echo_slack);
  }
  p.minimize(objective);
  return pp;
}

PhaseProblem build_phase_subproblem(const LiftedSet& L, const CMat& anchor, double kappa, const ScenarioConfig& cfg) {
  return build_phase_subproblem(L, anchor, kappa, cfg, phase_options(cfg));
}

PhaseConfig matched_phases(const ChannelSet& chs, int user) {
  const int M = static_cast<int>(chs.bs_rhs.rows());
  const CVec& hr = chs.rhs_user.at(user);
  CVec theta(M);
  for (int m = 0; m < M; ++m) {
    const cd c = std::conj(hr(m)) * chs.bs_rhs(m, 0);
    theta(m) = std::polar(1.0, -std::arg(c));
  }
  return phases_from_theta(theta);
}

namespace {

// Worst normalized slack of the rate and echo floors (negative when violated).
double worst_slack(const ChannelSet& chs, const CVec& theta, const Beams& beams, const ScenarioConfig& cfg,
                   const PhaseOptions& opt) {
  PhaseConfig pc;
  pc.theta = theta;
  double w = std::numeric_limits<double>::infinity();
  if (opt.enforce_rate) {
    w = std::min(w, (sum_rate(comm_sinrs(chs, pc, beams, cfg)) - cfg.rate_min) / std::max(cfg.rate_min, 1.0));
  }
  if (opt.enforce_echo && cfg.echo_sinr_min > 0.0) {
    w = std::min(w, (echo_sinr(chs, pc, beams, cfg) - cfg.echo_sinr_min) / cfg.echo_sinr_min);
  }
  return w;
}

double rank_ratio(const CMat& Psi) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (Psi + Psi.adjoint()));
  const Eigen::Index n = Psi.rows();
  const double l1 = es.eigenvalues()(n - 1);
  if (!(l1 > 0.0)) return 1.0;
  return n > 1 ? std::max(0.0, es.eigenvalues()(n - 2)) / l1 : 0.0;
}

}  // namespace

PhaseResult solve_phase_penalty(const ChannelSet& chs, const Beams& beams, const ScenarioConfig& cfg,
                                const PhaseOptions& opt, const PhaseConfig* anchor) {
  const int M = static_cast<int>(chs.bs_rhs.rows());
  PhaseResult res;
  const PhaseConfig start = anchor ? *anchor : matched_phases(chs, 0);
  if (start.theta.size() != M) throw ArgumentError("anchor phases have the wrong length");
  if (M == 1) {
    res.phases = phases_from_theta(CVec::Ones(1));
    res.lifted = augmented_lift(res.phases.theta);
    return res;
  }
  const auto L = lift_channels(chs, beams, cfg);
  const double start_slack = worst_slack(chs, start.theta, beams, cfg, opt);

  conic::SolverOptions so;
  so.tol = opt.conic_tol;
  so.max_iter = opt.conic_max_iter;
  CMat Psi = augmented_lift(start.theta);
  bool solved = false;
  double last_penalty = 0.0;
  for (double kappa = opt.kappa_start;; kappa *= opt.kappa_factor) {
    double prev = std::numeric_limits<double>::infinity();
    bool failed = false;
    for (int it = 0; it < opt.inner_max; ++it) {
      auto pp = build_phase_subproblem(L, Psi, kappa, cfg, opt);
      const auto s = conic::solve(pp.problem, so);
      ++res.solves;
      if (!s.usable(1e3 * opt.conic_tol)) {
        failed = true;
        break;
      }
      solved = true;
      const CMat next = conic::herm_value(pp.Psi, s.block(pp.Psi.block));
      last_penalty = s.eval(pp.penalty);
      res.trace.push_back({kappa, s.objective, rank_ratio(next)});
      Psi = next;
      const double change = std::abs(prev - s.objective);
      prev = s.objective;
      if (change <= opt.inner_tol * std::max(std::abs(s.objective), opt.slack_weight)) break;
    }
    if (failed) break;
    if (rank_ratio(Psi) <= opt.rank_tol || kappa * opt.kappa_factor > opt.kappa_cap * (1.0 + 1e-12)) break;
  }
  res.lifted = Psi;

  CVec theta = start.theta;
  double residual = 0.0;
  if (solved) {
    residual = rank_ratio(Psi);
    const auto r1 = conic::extract_rank_one(Psi);
    CVec raw(M);
    const cd tail = r1.vec(M);
    for (int m = 0; m < M; ++m) {
      raw(m) = std::abs(tail) > 0.0 ? std::conj(r1.vec(m) / tail) : std::conj(r1.vec(m));
    }
    const CVec projected = theta_from_lift(Psi);
    const double raw_slack = worst_slack(chs, raw, beams, cfg, opt);
    const double proj_slack = worst_slack(chs, projected, beams, cfg, opt);
    res.projection_delta = std::max(0.0, raw_slack - proj_slack);
    if (proj_slack >= -cfg.algo.feas_tol || proj_slack >= start_slack) {
      theta = projected;
    } else {
      res.fell_back = true;
    }
  } else {
    res.fell_back = true;
  }
  if (worst_slack(chs, theta, beams, cfg, opt) < -cfg.algo.feas_tol) {
    std::string fam = "19c";
    if (opt.enforce_echo && cfg.echo_sinr_min > 0.0) {
      PhaseConfig pc;
      pc.theta = theta;
      if (echo_sinr(chs, pc, beams, cfg) < cfg.echo_sinr_min) fam = "19d";
    }
    throw InfeasibleError("phase design: no feasible phases found (rank residual " + std::to_string(residual) + ")",
                          fam);
  }
  res.phases = phases_from_theta(theta);
  res.phases.rank_residual = residual;
  res.phases.penalty_value = last_penalty;
  return res;
}

PhaseConfig quantize_phases(const PhaseConfig& pc, int bits) {
  if (bits < 1) throw ArgumentError("quantization needs at least one bit");
  const double levels = std::ldexp(1.0, bits);
  const double step = 2.0 * std::numbers::pi / levels;
  CVec theta(pc.theta.size());
  for (Eigen::Index m = 0; m < pc.theta.size(); ++m) {
    double a = std::arg(pc.theta(m));
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    const double q = a / step;
    double idx = std::floor(q);
    if (q - idx > 0.5) idx += 1.0;
    idx = std::fmod(idx, levels);
    theta(m) = std::polar(1.0, idx * step);
  }
  return phases_from_theta(theta);
}

}  // namespace rhosi
