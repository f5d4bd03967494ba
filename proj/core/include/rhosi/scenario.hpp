#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rhosi/types.hpp"

namespace rhosi {

struct AeroParams {
  double blade_power = 79.86;            // P_0 [W]
  double induced_power = 88.63;          // P_I [W]
  double blade_angular_speed = 300.0;    // [rad/s]
  double rotor_radius = 0.4;             // [m]
  double fuselage_drag_ratio = 0.6;
  double air_density = 1.225;            // [kg/m^3]
  double rotor_solidity = 0.05;
  double disc_area = 0.503;              // [m^2]
  double mean_induced_velocity = 4.03;   // v_0 [m/s]
};

// Solver knobs shared by the three steps and the outer loop.
struct AlgoOptions {
  int max_outer = 20;
  double tol_outer = 1e-4;
  double conic_tol = 1e-8;
  int conic_max_iter = 200;
  double sca_tol = 1e-5;
  int sca_max_iter = 30;
  double rank_tol = 1e-3;
  bool randomization_fallback = true;
  int randomization_samples = 200;
  double kappa_start = 1.0;
  double kappa_factor = 10.0;
  double kappa_cap = 1e6;
  double phase_slack_weight = 1e-4;
  double trust_radius = 4.0;             // [m], position trust region of the trajectory step
  double traj_slack_weight = 1e-2;       // [W per bps/Hz], secondary term of the trajectory step
  int phase_bits = 3;
  std::string step_order = "bpt";        // b = beams, p = phases, t = trajectory
  double feas_tol = 1e-6;
};

struct ScenarioConfig {
  int num_antennas = 6;
  int num_users = 3;
  int num_elements = 20;
  int horizon_slots = 60;
  double slot_duration = 1.0;
  double total_time = 60.0;

  double area_side = 400.0;  // square deployment area [0, side]^2
  Vec2 bs_pos{0.0, 0.0};
  Vec2 jammer_pos{300.0, 300.0};
  Vec2 target_pos{200.0, 100.0};
  std::vector<Vec2> user_pos;
  bool randomize_users = true;  // redraw user_pos from seed

  double uav_altitude = 40.0;
  double service_radius = 200.0;

  double carrier_wavelength = 0.1;
  double rhs_spacing = 0.05;
  double bs_spacing = 0.05;
  double element_spacing_ratio = 0.5;

  double path_gain_ref = 1e-2;  // -20 dB
  double path_loss_exp = 2.0;
  double rician_factor = 1.9952623149688795;  // 3 dB

  double noise_power = 1e-12;       // -90 dBm
  double jam_power = 1.0;           // 30 dBm
  double bs_power_max = 10.0;       // 40 dBm
  double rate_min = 1.0;
  double echo_sinr_min = 1.9952623149688795;  // 3 dB

  double v_max = 15.0;
  double a_max = 5.0;
  double pa_inefficiency = 1.25;
  double circuit_power = 0.1;

  AeroParams aero;
  AlgoOptions algo;
  std::uint64_t seed = 1;
};

struct Violation {
  std::string field;
  std::string message;
};
using ValidationReport = std::vector<Violation>;

ScenarioConfig default_scenario();
ValidationReport validate_scenario(const ScenarioConfig& cfg);

// Key/value text: one "key = value" per line, '#' starts a comment.
// Keys ending in _db / _dbm are converted to linear / watts on load.
ScenarioConfig load_scenario(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& cfg);

// Sets the seed and, when users are seeded, redraws their positions.
ScenarioConfig with_seed(ScenarioConfig cfg, std::uint64_t seed);
// Applies RHOSI_SEED from the environment when present.
ScenarioConfig apply_env_seed(ScenarioConfig cfg);

// Portable random stream: mt19937_64 plus hand-rolled transforms so draws do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  cd complex_normal();  // CN(0, 1)
  std::uint64_t next() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace rhosi
