#pragma once

#include <cstdint>
#include <vector>

#include "rhosi/scenario.hpp"
#include "rhosi/types.hpp"

namespace rhosi {

struct GeometrySnapshot {
  Vec2 uav_xy{0.0, 0.0};
  int slot = 0;
  double d_br = 0.0;  // BS - RHS
  double d_jr = 0.0;  // jammer - RHS
  double d_rt = 0.0;  // RHS - target
  double d_jt = 0.0;  // jammer - target (ground)
  std::vector<double> d_rk;  // RHS - user k
  std::vector<double> d_bk;  // BS - user k (ground)
  std::vector<double> d_jk;  // jammer - user k (ground)
  double zeta = 0.0;   // vertical AoA from the BS
  double xi = 0.0;     // horizontal AoA from the BS
  double omega = 0.0;  // AoA from the jammer
  std::vector<double> phi;  // AoD toward user k
  double varsigma = 0.0;    // AoD toward the target
};

struct ChannelSet {
  CMat bs_rhs;                   // H, M x N_t
  CVec jam_rhs;                  // h_{J,R}, M
  std::vector<CVec> rhs_user;    // h_{R,k}, M each
  std::vector<CVec> bs_user;     // h_{B,k}, N_t each
  std::vector<cd> jam_user;      // h_{J,k}
  cd jam_target{0.0, 0.0};       // h_{J,T}
  CVec rhs_target_steer;         // a(varsigma), M
  CVec rhs_target;               // h_{R,T}, M
  int slot_index = 0;
  GeometrySnapshot geo;
};

// entry i = exp(j 2 pi i spacing_ratio sin(angle))
CVec steering_vector(double angle, int length, double spacing_ratio);
// pl_ref * distance^-beta
double path_gain(double distance, double pl_ref, double beta);
// exp(-j 2 pi spacing i c / wavelength), i = 0..length-1 (c is a direction cosine/sine)
CVec ula_response(double c, int length, double spacing, double wavelength);

GeometrySnapshot geometry(const ScenarioConfig& cfg, const Vec2& uav_xy, int slot);

cd rician_fade(cd los, double rician_factor, Rng& rng);

// Fading draws are keyed by (seed, slot, link, index) and do not depend on the UAV position.
ChannelSet assemble_channels(const ScenarioConfig& cfg, const Vec2& uav_xy, int slot, std::uint64_t seed);
inline ChannelSet assemble_channels(const ScenarioConfig& cfg, const Vec2& uav_xy, int slot) {
  return assemble_channels(cfg, uav_xy, slot, cfg.seed);
}

// Independent fading stream for one ground link entry.
Rng fading_stream(std::uint64_t seed, int slot, int link, int index);

}  // namespace rhosi
