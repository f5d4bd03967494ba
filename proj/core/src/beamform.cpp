#include "rhosi/beamform.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rhosi/metrics.hpp"
#include "rhosi/pwl.hpp"

namespace rhosi {

using conic::Expr;

BeamformData beamform_data(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg) {
  BeamformData d;
  for (int k = 0; k < cfg.num_users; ++k) {
    d.h.push_back(composite_bs(chs, phases.theta, k));
    d.varpi.push_back(cfg.jam_power * std::norm(composite_jam(chs, phases.theta, k)) + cfg.noise_power);
  }
  d.hr = echo_row(chs, phases.theta);
  d.echo_den = cfg.jam_power * std::norm(echo_jam(chs, phases.theta)) + cfg.noise_power;
  return d;
}

double amgm_bound(double eps, double nu, double eps_anchor, double nu_anchor) {
  return eps_anchor / (2.0 * nu_anchor) * nu * nu + nu_anchor / (2.0 * eps_anchor) * eps * eps;
}

namespace {

constexpr double kEpsFloor = 1e-12;
constexpr double kRateRatio = 1.6;
constexpr int kRateCount = 6;

double log2p1(double x) { return std::log2(1.0 + x); }

}  // namespace

BeamformProblem build_beamforming_subproblem(const BeamformData& data, const BeamformIterate& it,
                                             const ScenarioConfig& cfg) {
  const int K = cfg.num_users, Nt = cfg.num_antennas;
  if (static_cast<int>(it.eps.size()) != K || static_cast<int>(it.nu.size()) != K) {
    throw ArgumentError("beamforming iterate has the wrong size");
  }
  for (int k = 0; k < K; ++k) {
    if (!(it.eps[k] > 0.0) || !(it.nu[k] > 0.0)) throw ArgumentError("beamforming iterate must be positive");
  }
  BeamformProblem bp;
  auto& p = bp.problem;
  for (int k = 0; k < K; ++k) {
    bp.W.push_back(p.add_hermitian_psd(Nt, "W" + std::to_string(k)));
    bp.eps.push_back(p.add_nonneg("eps" + std::to_string(k)));
    bp.nu.push_back(p.add_nonneg("nu" + std::to_string(k)));
    bp.rate.push_back(p.add_nonneg("rate" + std::to_string(k)));
  }
  Expr power;
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < Nt; ++m) power += conic::herm_diag(bp.W[k], m);
  }
  p.minimize(cfg.pa_inefficiency * power);
  p.add_leq(power, cfg.bs_power_max, "power-cap");

  Expr rate_sum;
  for (int k = 0; k < K; ++k) {
    const CVec c = data.h[k].adjoint();
    Expr interf(1.0);
    for (int i = 0; i < K; ++i) {
      if (i != k) interf += conic::herm_quad(bp.W[i], c, 1.0 / data.varpi[k]);
    }
    p.add_geq(Expr(bp.nu[k]) - interf, "interference" + std::to_string(k));
    const double e0 = it.eps[k], n0 = it.nu[k];
    const Expr signal = conic::herm_quad(bp.W[k], c, 1.0 / data.varpi[k]);
    p.add_rsoc(signal, 1.0,
               {std::sqrt(e0 / (2.0 * n0)) * Expr(bp.nu[k]), std::sqrt(n0 / (2.0 * e0)) * Expr(bp.eps[k])},
               "amgm" + std::to_string(k));
    const double hi = e0 * std::pow(kRateRatio, kRateCount);
    const auto bps = pwl::geometric_breakpoints(e0, kRateRatio, kRateCount, 0.0, hi);
    pwl::add_concave_hypograph(p, bp.rate[k], bp.eps[k], log2p1, bps, "rate" + std::to_string(k));
    rate_sum += bp.rate[k];
  }
  p.add_geq(rate_sum - cfg.rate_min, "sum-rate");

  Expr echo;
  const CVec cr = data.hr.adjoint();
  for (int k = 0; k < K; ++k) echo += conic::herm_quad(bp.W[k], cr, 1.0 / data.echo_den);
  p.add_geq(echo - cfg.echo_sinr_min, "echo");
  return bp;
}

BeamformProblem build_beamforming_subproblem(const ChannelSet& chs, const PhaseConfig& phases,
                                             const BeamformIterate& it, const ScenarioConfig& cfg) {
  return build_beamforming_subproblem(beamform_data(chs, phases, cfg), it, cfg);
}

BeamformIterate iterate_from_beams(const BeamformData& data, const Beams& beams) {
  const int K = static_cast<int>(beams.size());
  BeamformIterate it;
  for (int k = 0; k < K; ++k) {
    double interf = 0.0;
    for (int i = 0; i < K; ++i) {
      if (i != k) interf += std::norm((data.h[k] * beams[i])(0));
    }
    const double nu = interf / data.varpi[k] + 1.0;
    const double sig = std::norm((data.h[k] * beams[k])(0)) / data.varpi[k];
    it.nu.push_back(nu);
    it.eps.push_back(std::max(sig / nu, kEpsFloor));
  }
  return it;
}

bool minimal_feasible_scaling(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                              const ScenarioConfig& cfg, double& scale) {
  const double p = transmit_power(beams);
  if (!(p > 0.0)) return false;
  auto feasible = [&](double s) {
    Beams b = beams;
    for (auto& w : b) w *= s;
    if (sum_rate(comm_sinrs(chs, phases, b, cfg)) < cfg.rate_min) return false;
    return echo_sinr(chs, phases, b, cfg) >= cfg.echo_sinr_min;
  };
  double hi = std::sqrt(cfg.bs_power_max / p);
  if (!feasible(hi)) return false;
  double lo = 0.0;
  for (int i = 0; i < 100 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  scale = hi;
  return true;
}

bool initial_beams(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg, Beams& out) {
  const int K = cfg.num_users, Nt = cfg.num_antennas;
  const auto d = beamform_data(chs, phases, cfg);
  auto unit = [&](const Eigen::RowVectorXcd& r) {
    CVec v = r.adjoint();
    const double n = v.norm();
    return n > 0.0 ? CVec(v / n) : CVec(CVec::Ones(Nt) / std::sqrt(static_cast<double>(Nt)));
  };
  const CVec er = unit(d.hr);
  std::vector<Beams> candidates;
  for (double mix : {0.0, 0.25, 0.5, 0.75, 0.9}) {
    Beams all;
    for (int k = 0; k < K; ++k) all.push_back(((1.0 - mix) * unit(d.h[k]) + mix * er) / std::sqrt(double(K)));
    candidates.push_back(all);
    for (int j = 0; j < K; ++j) {
      Beams one(K, CVec::Zero(Nt));
      one[j] = (1.0 - mix) * unit(d.h[j]) + mix * er;
      candidates.push_back(one);
    }
  }
  // One user served plus a separate sensing beam carried by another index.
  if (K > 1) {
    for (double share : {0.1, 0.3, 0.5, 0.7}) {
      for (int j = 0; j < K; ++j) {
        Beams split(K, CVec::Zero(Nt));
        split[j] = std::sqrt(1.0 - share) * unit(d.h[j]);
        split[(j + 1) % K] = std::sqrt(share) * er;
        candidates.push_back(split);
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (auto& c : candidates) {
    double s = 0.0;
    if (!minimal_feasible_scaling(chs, phases, c, cfg, s)) continue;
    for (auto& w : c) w *= s;
    const double pw = transmit_power(c);
    if (pw < best) {
      best = pw;
      out = c;
    }
  }
  return std::isfinite(best);
}

std::string binding_family(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg) {
  const auto d = beamform_data(chs, phases, cfg);
  Beams b;
  for (int k = 0; k < cfg.num_users; ++k) b.push_back(d.hr.adjoint());
  const double p = transmit_power(b);
  if (p > 0.0) {
    for (auto& w : b) w *= std::sqrt(cfg.bs_power_max / p);
    if (echo_sinr(chs, phases, b, cfg) < cfg.echo_sinr_min) return "19d";
  }
  return "19c";
}

BeamformingSolution solve_beamforming_sca(const ChannelSet& chs, const PhaseConfig& phases,
                                          const ScenarioConfig& cfg, const Beams* warm) {
  const int K = cfg.num_users, Nt = cfg.num_antennas;
  const auto data = beamform_data(chs, phases, cfg);
  const auto& algo = cfg.algo;

  Beams start;
  bool have_warm = false;
  double warm_power = std::numeric_limits<double>::infinity();
  if (warm && static_cast<int>(warm->size()) == K) {
    if (sum_rate(comm_sinrs(chs, phases, *warm, cfg)) >= cfg.rate_min &&
        echo_sinr(chs, phases, *warm, cfg) >= cfg.echo_sinr_min &&
        transmit_power(*warm) <= cfg.bs_power_max * (1.0 + 1e-12)) {
      start = *warm;
      have_warm = true;
      warm_power = cfg.pa_inefficiency * transmit_power(*warm);
    }
  }
  if (!have_warm && !initial_beams(chs, phases, cfg, start)) {
    throw InfeasibleError("beamforming: no feasible start within the power cap", binding_family(chs, phases, cfg));
  }

  BeamformingSolution sol;
  BeamformIterate it = iterate_from_beams(data, start);
  conic::SolverOptions so;
  so.tol = algo.conic_tol;
  so.max_iter = algo.conic_max_iter;
  std::vector<Mat> blocks;
  double prev = std::numeric_limits<double>::infinity();
  bool solved = false;
  for (int t = 0; t < algo.sca_max_iter; ++t) {
    auto bp = build_beamforming_subproblem(data, it, cfg);
    auto s = conic::solve(bp.problem, so);
    if (!s.usable(1e3 * algo.conic_tol)) break;
    solved = true;
    sol.iterations = t + 1;
    sol.trace.push_back(s.objective);
    sol.lifted.clear();
    for (int k = 0; k < K; ++k) sol.lifted.push_back(conic::herm_value(bp.W[k], s.block(bp.W[k].block)));
    for (int k = 0; k < K; ++k) {
      it.eps[k] = std::max(s.value(bp.eps[k]), kEpsFloor);
      it.nu[k] = std::max(s.value(bp.nu[k]), 1.0);
    }
    sol.relaxed_objective = s.objective;
    const double change = std::abs(prev - s.objective);
    prev = s.objective;
    if (change <= algo.sca_tol * std::max(std::abs(s.objective), 1e-30)) break;
  }
  sol.aux = it;

  Beams best = start;
  double best_power = cfg.pa_inefficiency * transmit_power(start);
  if (solved) {
    Beams rec;
    double worst = 0.0;
    for (int k = 0; k < K; ++k) {
      auto r1 = conic::extract_rank_one(sol.lifted[k]);
      sol.rank_residuals.push_back(r1.residual);
      worst = std::max(worst, r1.residual);
      rec.push_back(r1.vec);
    }
    double s = 0.0;
    if (minimal_feasible_scaling(chs, phases, rec, cfg, s)) {
      for (auto& w : rec) w *= s;
      const double pw = cfg.pa_inefficiency * transmit_power(rec);
      sol.rescaled = std::abs(s - 1.0) > 1e-9;
      if (pw < best_power) {
        best_power = pw;
        best = rec;
      }
    }
    if (worst > algo.rank_tol && algo.randomization_fallback) {
      Rng rng(mix_seed(cfg.seed, 0x72616e64ULL + static_cast<std::uint64_t>(chs.slot_index)));
      std::vector<CMat> F;
      for (int k = 0; k < K; ++k) {
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (sol.lifted[k] + sol.lifted[k].adjoint()));
        F.push_back(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal());
      }
      for (int smp = 0; smp < algo.randomization_samples; ++smp) {
        Beams cand;
        for (int k = 0; k < K; ++k) {
          CVec r(Nt);
          for (int i = 0; i < Nt; ++i) r(i) = rng.complex_normal();
          cand.push_back(F[k] * r);
        }
        double sc = 0.0;
        if (!minimal_feasible_scaling(chs, phases, cand, cfg, sc)) continue;
        for (auto& w : cand) w *= sc;
        const double pw = cfg.pa_inefficiency * transmit_power(cand);
        if (pw < best_power) {
          best_power = pw;
          best = cand;
          sol.randomized = true;
        }
      }
    }
  }
  if (have_warm && best_power > warm_power) {
    best = *warm;
    best_power = warm_power;
  }
  sol.beams = best;
  sol.objective = best_power;
  return sol;
}

}  // namespace rhosi
