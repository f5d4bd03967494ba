#pragma once

#include <string>
#include <vector>

#include "rhosi/channel.hpp"
#include "rhosi/scenario.hpp"
#include "rhosi/solution.hpp"

namespace rhosi {

// hhat_{B,k} = h_{B,k}^H + h_{R,k}^H Theta H, returned as a row vector
Eigen::RowVectorXcd composite_bs(const ChannelSet& chs, const CVec& theta, int user);
// hhat_{J,k} = h_{J,k} + h_{R,k}^H Theta h_{J,R}
cd composite_jam(const ChannelSet& chs, const CVec& theta, int user);
// h_r = a^H Theta H (row) and the echo jamming coefficient h_{J,T} + a^H Theta h_{J,R}
Eigen::RowVectorXcd echo_row(const ChannelSet& chs, const CVec& theta);
cd echo_jam(const ChannelSet& chs, const CVec& theta);

double comm_sinr(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, int user,
                 const ScenarioConfig& cfg);
std::vector<double> comm_sinrs(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                               const ScenarioConfig& cfg);
double sum_rate(const std::vector<double>& sinrs);

double beampattern_gain(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, double angle,
                        double spacing_ratio);
double beampattern_gain(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams);
double echo_sinr(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, const ScenarioConfig& cfg);

double profile_power(double speed, const AeroParams& a);
double parasite_power(double speed, const AeroParams& a);
double induced_power(double speed, const AeroParams& a);
double aero_power(const Vec2& v, const AeroParams& a);
// speed minimizing aero_power on [0, vmax]
double min_power_speed(const AeroParams& a, double vmax);

double transmit_power(const Beams& beams);
double total_power(const Beams& beams, const Vec2& v, const ScenarioConfig& cfg);
double constant_power(const ScenarioConfig& cfg);  // (N_t + 1) P_circ + g_Jam

struct ConstraintSlack {
  std::string family;  // "19b" ... "19i"
  int slot = 0;
  double slack = 0.0;  // normalized; negative means violated
};

struct FeasibilityReport {
  std::vector<ConstraintSlack> slacks;
  double worst_violation = 0.0;
  std::string worst_family;
  int worst_slot = -1;
  bool feasible = true;
};

// Per-slot channels must correspond to the trajectory positions.
FeasibilityReport check_feasibility(const SolutionBundle& sol, const std::vector<ChannelSet>& chs,
                                    const ScenarioConfig& cfg, double tol = 1e-6);
// Convenience: rebuilds the channels from the trajectory.
FeasibilityReport check_feasibility(const SolutionBundle& sol, const ScenarioConfig& cfg, double tol = 1e-6);

// Mean over slots of total_power.
double average_total_power(const SolutionBundle& sol, const ScenarioConfig& cfg);

}  // namespace rhosi
