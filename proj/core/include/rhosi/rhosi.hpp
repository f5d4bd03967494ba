#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhosi/beamform.hpp"
#include "rhosi/metrics.hpp"
#include "rhosi/phaseshift.hpp"
#include "rhosi/scenario.hpp"
#include "rhosi/solution.hpp"
#include "rhosi/trajectory.hpp"

namespace rhosi {

struct AoOptions {
  int max_outer = 20;
  double tol_outer = 1e-4;
  std::string step_order = "bpt";  // any arrangement of b (beams), p (phases), t (trajectory)
  int phase_inner_max = 3;         // penalty passes per phase step
  bool optimize_phases = true;
  bool optimize_positions = true;
  std::optional<Trajectory> start_trajectory;          // replaces initial_trajectory when set
  std::optional<std::vector<PhaseConfig>> start_phases;  // replaces the aligned start phases when set
};
AoOptions ao_options(const ScenarioConfig& cfg);

struct AoRecord {
  int iteration = 0;
  double objective = 0.0;                 // mean total power [W], constants included
  double transmit = 0.0;                  // mean sum ||w_k||^2 [W]
  double aero = 0.0;                      // mean aerodynamic power [W]
  std::vector<double> step_objectives;    // objective after each step, in step order
  std::vector<std::string> rejected;      // steps whose result was discarded
  FeasibilityReport feasibility;
  double wall_time = 0.0;                 // [s]
  double max_rank_residual = 0.0;         // worst lifted rank residual of the phase step
  int beam_iterations = 0;                // SCA passes summed over slots
  int phase_solves = 0;
  int trajectory_iterations = 0;
};

struct AoTrace {
  double initial_objective = 0.0;
  std::vector<AoRecord> records;
  SolutionBundle solution;
  bool converged = false;
  bool failed = false;
  std::string diagnostic;

  std::vector<double> objectives() const;
};

// Initial point: trajectory from initial_trajectory, phases aligned to one
// user's cascade, and maximum-ratio style beams scaled to feasibility; the
// cheapest feasible combination per slot is kept.
SolutionBundle initial_solution(const ScenarioConfig& cfg);
SolutionBundle initial_solution(const ScenarioConfig& cfg, const Trajectory& traj,
                                const std::vector<PhaseConfig>* phases = nullptr);

AoTrace run_rhosi(const ScenarioConfig& cfg, const AoOptions& opt);
inline AoTrace run_rhosi(const ScenarioConfig& cfg) { return run_rhosi(cfg, ao_options(cfg)); }

// True iff objective[s + 1] <= objective[s] + tol for every s; on failure the
// index is the first offending entry, otherwise -1.
std::pair<bool, int> verify_monotone(const std::vector<double>& objectives, double tol);
std::pair<bool, int> verify_monotone(const AoTrace& trace, double tol);

// One line per iteration: "iter <s> obj <W> tx <W> aero <W> worst <slack> time <s> ...".
std::string format_trace(const AoTrace& trace);

}  // namespace rhosi
