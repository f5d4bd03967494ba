#pragma once

#include <array>
#include <vector>

#include "rhosi/channel.hpp"
#include "rhosi/conic.hpp"
#include "rhosi/scenario.hpp"
#include "rhosi/solution.hpp"

namespace rhosi {

// Position-dependent part of one slot's link budget for fixed beams and phases.
// Every cascade amplitude is written as (distance product)^(-beta/2) times a
// distance-free factor evaluated at the anchor angles, e.g. the received power
// of beam i at user k is
//   x_k^2 lambda_bs[k][i] + x_k upsilon_bs[k][i] + iota[k][i],  x_k = (d_Rk d_BR)^(-beta/2),
// the jamming power at user k is
//   y_k^2 lambda_jam[k] + y_k upsilon_jam[k] + g_Jam |h_Jk|^2,  y_k = (d_Rk d_JR)^(-beta/2),
// and the echo reads c^2 lambda_rt / (d^2 lambda_jt + d upsilon_jt + varpi_t) with
// c = d_BR^(-beta/2), d = d_JR^(-beta/2).
struct SlotCoefficients {
  int K = 0;
  std::vector<std::vector<double>> lambda_bs, upsilon_bs, iota;  // [k][i]
  std::vector<double> lambda_jam, upsilon_jam;
  std::vector<double> varpi;  // g_Jam |h_Jk|^2 + sigma^2
  double lambda_rt = 0.0;
  double lambda_jt = 0.0, upsilon_jt = 0.0;
  double varpi_t = 0.0;  // g_Jam |h_JT|^2 + sigma^2
  double noise_power = 0.0;
};

SlotCoefficients lambda_upsilon_coefficients(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                                             const ScenarioConfig& cfg);

// SINR of user k and the echo SINR rebuilt from the coefficients at the given
// distance powers; they equal the channel-level metrics at the anchor distances.
double surrogate_sinr(const SlotCoefficients& c, int k, double x, double y);
double surrogate_echo_sinr(const SlotCoefficients& c, double cpow, double dpow);

// Air-link distance between the UAV at horizontal position q and a ground point.
double air_distance(const Vec2& q, const Vec2& ground, double altitude);

// Convex majorant of d1(q) d2(q), exact at the anchor.
double product_bound_upper(const Vec2& q, const Vec2& anchor, const Vec2& e1, const Vec2& e2, double altitude);
// Concave minorant of d1(q) d2(q), exact at the anchor.
double product_bound_lower(const Vec2& q, const Vec2& anchor, const Vec2& e1, const Vec2& e2, double altitude);

// Tangent of the convex map x -> x^(-p) at x0, a global minorant.
double power_tangent(double x, double x0, double p);
// Tangent of a^2 lambda + a upsilon + c at a0, a global minorant when lambda >= 0.
double quadratic_tangent(double a, double a0, double lambda, double upsilon, double c = 0.0);
// Echo margin c^2 lrt - gamma (d^2 ljt + d ujt + varpi) with the c-part linearized at c0;
// a global minorant of the margin.
double echo_margin_bound(double c, double d, double c0, const SlotCoefficients& co, double gamma);
double echo_margin(double c, double d, const SlotCoefficients& co, double gamma);

// Induced-power factor of the rotor model at speed |v|.
double induced_factor(const Vec2& v, double v0);
// First-order minorant of aleph^2 + |v|^2 / v0^2 around (aleph0, v_anchor).
double f_bound(double aleph, const Vec2& v, double aleph0, const Vec2& v_anchor, double v0);

struct TrajectoryOptions {
  int max_iter = 30;
  double tol = 1e-5;
  double trust_radius = 4.0;  // [m]
  double slack_weight = 1e-2;
  double conic_tol = 1e-8;
  int conic_max_iter = 200;
  double feas_tol = 1e-6;
  bool optimize_positions = true;
};
TrajectoryOptions trajectory_options(const ScenarioConfig& cfg);

// Anchor of one SCA pass over the whole horizon.
struct TrajectoryIterate {
  std::vector<Vec2> q, v;
  std::vector<double> aleph;
  std::vector<std::vector<double>> kappa, chi;  // per-slot SINR and normalized interference anchors
  std::vector<double> trust;                    // per-slot position radius [m]; 0 freezes the slot
};

struct TrajectoryProblem {
  conic::Problem problem;
  std::vector<std::array<conic::Var, 2>> q, v;  // q in units of 100 m, v in units of v_max
  std::vector<conic::Var> aleph;
  std::vector<std::vector<conic::Var>> kappa, chi;
  conic::Expr aero;  // mean over slots of the surrogate aerodynamic power [W]
  double pos_scale = 100.0;
  double vel_scale = 1.0;
};

TrajectoryProblem build_trajectory_subproblem(const TrajectoryIterate& it, const std::vector<SlotCoefficients>& co,
                                              const ScenarioConfig& cfg, const TrajectoryOptions& opt);

// Hover anchor used when the rotor model makes hovering cheapest, otherwise
// cruise at the minimum-power speed along +x, all slots at the disk center.
Trajectory initial_trajectory(const ScenarioConfig& cfg);

struct TrajectoryResult {
  Trajectory traj;
  std::vector<double> aero;       // true aerodynamic power per slot [W]
  std::vector<double> trace;      // surrogate objective per accepted pass
  std::vector<double> aero_trace; // true mean aerodynamic power per accepted pass
  std::vector<double> aleph;      // last solved induced-power slacks
  int iterations = 0;
  int frozen_slots = 0;           // slots whose move failed the true check
};

TrajectoryResult solve_trajectory_sca(const ScenarioConfig& cfg, const std::vector<PhaseConfig>& phases,
                                      const std::vector<Beams>& beams, const Trajectory& start,
                                      const TrajectoryOptions& opt);

}  // namespace rhosi
