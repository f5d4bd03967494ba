#pragma once

#include <string>
#include <vector>

#include "rhosi/channel.hpp"
#include "rhosi/conic.hpp"
#include "rhosi/scenario.hpp"
#include "rhosi/solution.hpp"

namespace rhosi {

// Channel quantities seen by the beamformer for fixed phases, normalized so that
// Tr(R_k W) is the signal-to-(jamming + noise) ratio contributed by W.
struct BeamformData {
  std::vector<Eigen::RowVectorXcd> h;  // composite rows hhat_{B,k}
  std::vector<double> varpi;           // g_Jam |hhat_{J,k}|^2 + sigma^2
  Eigen::RowVectorXcd hr;              // a^H Theta H
  double echo_den = 1.0;               // g_Jam |hhat_{J,T}|^2 + sigma^2
};
BeamformData beamform_data(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg);

struct BeamformIterate {
  std::vector<double> eps;  // SINR surrogates
  std::vector<double> nu;   // normalized interference-plus-noise surrogates
};

// (eps~ / 2 nu~) nu^2 + (nu~ / 2 eps~) eps^2, the convex majorant of eps * nu
double amgm_bound(double eps, double nu, double eps_anchor, double nu_anchor);

struct BeamformProblem {
  conic::Problem problem;
  std::vector<conic::HermitianBlock> W;
  std::vector<conic::Var> eps, nu, rate;
};

BeamformProblem build_beamforming_subproblem(const BeamformData& data, const BeamformIterate& it,
                                             const ScenarioConfig& cfg);
BeamformProblem build_beamforming_subproblem(const ChannelSet& chs, const PhaseConfig& phases,
                                             const BeamformIterate& it, const ScenarioConfig& cfg);

struct BeamformingSolution {
  std::vector<CMat> lifted;
  Beams beams;
  BeamformIterate aux;
  double objective = 0.0;  // eta * sum ||w_k||^2 of the returned beams
  double relaxed_objective = 0.0;
  std::vector<double> rank_residuals;
  std::vector<double> trace;  // relaxed objective per SCA pass
  int iterations = 0;
  bool rescaled = false;
  bool randomized = false;
};

// Anchor (eps, nu) implied by a set of beams.
BeamformIterate iterate_from_beams(const BeamformData& data, const Beams& beams);

// Smallest common scale s with s^2 sum ||w||^2 <= P_max that meets the rate and
// echo floors; returns false if none exists.
bool minimal_feasible_scaling(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                              const ScenarioConfig& cfg, double& scale);

// Equal-power maximum-ratio start (or single-user variants), scaled to feasibility.
bool initial_beams(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg, Beams& out);

// Names the constraint family ("19c" or "19d") that blocks a feasible start.
std::string binding_family(const ChannelSet& chs, const PhaseConfig& phases, const ScenarioConfig& cfg);

BeamformingSolution solve_beamforming_sca(const ChannelSet& chs, const PhaseConfig& phases,
                                          const ScenarioConfig& cfg, const Beams* warm = nullptr);

}  // namespace rhosi
