#pragma once

#include <vector>

#include "rhosi/channel.hpp"
#include "rhosi/conic.hpp"
#include "rhosi/scenario.hpp"
#include "rhosi/solution.hpp"

namespace rhosi {

// Phase-dependent channel coefficients for fixed beams. With Theta = diag(theta)
// the cascades read theta^T G, e.g. h_{R,k}^H Theta H w = theta^T G_{B,k} w.
//
// The optimization works on the augmented vector psi = [conj(theta); 1] and its
// lift Psi = psi psi^H of size M + 1, so that every received amplitude is the
// exact inner product psi^H c (cascade plus direct path) and every power is
// the linear form c^H Psi c = Tr(Psi c c^H).
struct LiftedSet {
  int M = 0;
  int K = 0;
  std::vector<CMat> G_bs;   // G_{B,k} = diag(h_{R,k}^*) H, M x N_t
  std::vector<CVec> G_jam;  // G_{J,k} = diag(h_{R,k}^*) h_{J,R}
  CMat G_rt;                // diag(a^*) H
  CVec G_jt;                // diag(a^*) h_{J,R}

  std::vector<std::vector<CVec>> c_bs;  // c_bs[k][i] = [G_{B,k} w_i; h_{B,k}^H w_i]
  std::vector<CVec> c_jam;              // [G_{J,k}; h_{J,k}]
  std::vector<CVec> c_echo;             // [G_rt w_k; 0]
  CVec c_echo_jam;                      // [G_jt; h_{J,T}]

  std::vector<CMat> xi_bs;    // Xi_{B,k} = c_bs[k][k] c_bs[k][k]^H
  std::vector<CMat> xi_jam;   // Xi_{J,k} = g_Jam c_jam[k] c_jam[k]^H
  std::vector<CMat> xi_rt;    // Xi_{RT,k} = c_echo[k] c_echo[k]^H
  CMat xi_jt;                 // Xi_{J,T} = g_Jam c_echo_jam c_echo_jam^H
  std::vector<double> varpi;  // varpi_{J,k} = g_Jam |h_{J,k}|^2 + sigma^2
  double varpi_t = 0.0;       // g_Jam |h_{J,T}|^2 + sigma^2

  double jam_power = 0.0;
  double noise_power = 0.0;
};

LiftedSet lift_channels(const ChannelSet& chs, const Beams& beams, const ScenarioConfig& cfg);

// psi psi^H for psi = [conj(theta); 1]
CMat augmented_lift(const CVec& theta);
// theta recovered from a (near) rank-one augmented lift, projected to unit modulus
CVec theta_from_lift(const CMat& Psi);

// Interference-plus-jamming-plus-noise power of user k and its signal-inclusive total.
double lifted_interference(const CMat& Psi, const LiftedSet& L, int k);
double lifted_total(const CMat& Psi, const LiftedSet& L, int k);
// Sum rate of a lifted configuration; equals the true sum rate at rank-one Psi.
double lifted_sum_rate(const CMat& Psi, const LiftedSet& L);

// B(Psi) = -sum_k log2 I_k(Psi), convex, so the rate reads sum_k log2 T_k(Psi) + B(Psi).
double dc_B(const CMat& Psi, const LiftedSet& L);
// Tangent of B at the anchor evaluated at Psi; a global underestimator of B.
double dc_bound_B(const CMat& Psi, const CMat& anchor, const LiftedSet& L);

struct PhaseOptions {
  double kappa_start = 1.0;
  double kappa_factor = 10.0;
  double kappa_cap = 1e6;
  double rank_tol = 1e-3;
  double slack_weight = 1e-4;
  int inner_max = 30;
  double inner_tol = 1e-5;
  double conic_tol = 1e-8;
  int conic_max_iter = 200;
  bool enforce_rate = true;
  bool enforce_echo = true;
};
PhaseOptions phase_options(const ScenarioConfig& cfg);

struct PhaseProblem {
  conic::Problem problem;
  conic::HermitianBlock Psi;
  std::vector<conic::Var> rate;
  conic::Var rate_slack, echo_slack;
  conic::Expr penalty;  // kappa (Tr Psi - linearized spectral norm)
};

// One convex pass anchored at an augmented lift.
PhaseProblem build_phase_subproblem(const LiftedSet& L, const CMat& anchor, double kappa, const ScenarioConfig& cfg,
                                    const PhaseOptions& opt);
PhaseProblem build_phase_subproblem(const LiftedSet& L, const CMat& anchor, double kappa, const ScenarioConfig& cfg);

// kappa (||Psi||_* - ||anchor||_2 - u^H (Psi - anchor) u) with u the top eigenvector of the anchor
double spectral_penalty(const CMat& Psi, const CMat& anchor, double kappa);

struct PhaseTracePoint {
  double kappa = 0.0;
  double objective = 0.0;
  double rank_residual = 0.0;
};

struct PhaseResult {
  PhaseConfig phases;
  CMat lifted;  // last augmented solution before projection
  std::vector<PhaseTracePoint> trace;
  int solves = 0;
  double projection_delta = 0.0;  // change of the worst normalized slack caused by projection
  bool fell_back = false;         // the anchor was kept
};

// Phases aligning the BS -> RHS -> user path of the given user.
PhaseConfig matched_phases(const ChannelSet& chs, int user = 0);

PhaseResult solve_phase_penalty(const ChannelSet& chs, const Beams& beams, const ScenarioConfig& cfg,
                                const PhaseOptions& opt, const PhaseConfig* anchor = nullptr);

// Snap every phase to the nearest of 2^bits uniform points; ties go to the smaller angle.
PhaseConfig quantize_phases(const PhaseConfig& pc, int bits);

}  // namespace rhosi
