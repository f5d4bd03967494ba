#pragma once

#include <vector>

#include "rhosi/types.hpp"

namespace rhosi {

using Beams = std::vector<CVec>;

struct PhaseConfig {
  CVec theta;              // unit-modulus RHS phases
  CMat omega;              // theta theta^H (or the lifted solution before projection)
  double rank_residual = 0.0;
  double penalty_value = 0.0;
};

PhaseConfig phases_from_theta(const CVec& theta);
PhaseConfig unit_phases(int M);

struct Trajectory {
  std::vector<Vec2> q;  // horizontal positions per slot [m]
  std::vector<Vec2> v;  // velocities per slot [m/s]
};

// Decisions of one full run: per-slot beams and phases plus the trajectory.
struct SolutionBundle {
  std::vector<Beams> beams;
  std::vector<PhaseConfig> phases;
  Trajectory traj;
};

}  // namespace rhosi
