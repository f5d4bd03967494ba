#include "rhosi/channel.hpp"

#include <algorithm>
#include <cmath>

namespace rhosi {

namespace {

double clamped_acos(double x) { return std::acos(std::clamp(x, -1.0, 1.0)); }
double clamped_asin(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

double air_distance(const Vec2& a, const Vec2& b, double L) { return std::sqrt((a - b).squaredNorm() + L * L); }

double ground_distance(const Vec2& a, const Vec2& b, const char* what) {
  const double d = (a - b).norm();
  if (!(d > 0.0)) throw GeometryError(std::string("coincident ground points: ") + what);
  return d;
}

enum Link : int { kBsUser = 1, kJamUser = 2, kJamTarget = 3 };

}  // namespace

CVec steering_vector(double angle, int length, double spacing_ratio) {
  if (length < 1) throw ArgumentError("steering vector length must be at least 1");
  CVec a(length);
  const double s = std::sin(angle);
  for (int i = 0; i < length; ++i) a(i) = std::polar(1.0, 2.0 * kPi * i * spacing_ratio * s);
  return a;
}

double path_gain(double distance, double pl_ref, double beta) {
  if (!(distance > 0.0)) throw ArgumentError("path gain needs a positive distance");
  return pl_ref * std::pow(distance, -beta);
}

CVec ula_response(double c, int length, double spacing, double wavelength) {
  if (length < 1) throw ArgumentError("array length must be at least 1");
  CVec r(length);
  for (int i = 0; i < length; ++i) r(i) = std::polar(1.0, -2.0 * kPi * spacing * i * c / wavelength);
  return r;
}

GeometrySnapshot geometry(const ScenarioConfig& cfg, const Vec2& q, int slot) {
  if (slot < 0 || slot >= cfg.horizon_slots) throw ArgumentError("slot index out of range");
  const double L = cfg.uav_altitude;
  if (!(L > 0.0)) throw GeometryError("UAV altitude must be positive");
  GeometrySnapshot g;
  g.uav_xy = q;
  g.slot = slot;
  g.d_br = air_distance(cfg.bs_pos, q, L);
  g.d_jr = air_distance(cfg.jammer_pos, q, L);
  g.d_rt = air_distance(cfg.target_pos, q, L);
  g.d_jt = ground_distance(cfg.jammer_pos, cfg.target_pos, "jammer/target");
  g.zeta = clamped_acos(std::abs(cfg.bs_pos.x() - q.x()) / g.d_br);
  g.xi = clamped_asin(std::abs(cfg.bs_pos.y() - q.y()) / g.d_br);
  g.omega = clamped_acos(std::abs(cfg.jammer_pos.x() - q.x()) / g.d_jr);
  g.varsigma = clamped_acos(std::abs(q.x() - cfg.target_pos.x()) / g.d_rt);
  const int K = cfg.num_users;
  for (int k = 0; k < K; ++k) {
    const Vec2& u = cfg.user_pos.at(k);
    const double drk = air_distance(u, q, L);
    g.d_rk.push_back(drk);
    g.d_bk.push_back(ground_distance(cfg.bs_pos, u, "BS/user"));
    g.d_jk.push_back(ground_distance(cfg.jammer_pos, u, "jammer/user"));
    g.phi.push_back(clamped_acos(std::abs(q.x() - u.x()) / drk));
  }
  return g;
}

cd rician_fade(cd los, double rician_factor, Rng& rng) {
  const double a = std::sqrt(rician_factor / (rician_factor + 1.0));
  const double b = std::sqrt(1.0 / (rician_factor + 1.0));
  return a * los + b * rng.complex_normal();
}

Rng fading_stream(std::uint64_t seed, int slot, int link, int index) {
  std::uint64_t s = mix_seed(seed, 0x66616465ULL);
  s = mix_seed(s, static_cast<std::uint64_t>(slot));
  s = mix_seed(s, static_cast<std::uint64_t>(link));
  s = mix_seed(s, static_cast<std::uint64_t>(index));
  return Rng(s);
}

ChannelSet assemble_channels(const ScenarioConfig& cfg, const Vec2& q, int slot, std::uint64_t seed) {
  const auto g = geometry(cfg, q, slot);
  const int M = cfg.num_elements, Nt = cfg.num_antennas, K = cfg.num_users;
  const double lam = cfg.carrier_wavelength, PL = cfg.path_gain_ref, beta = cfg.path_loss_exp;
  ChannelSet ch;
  ch.slot_index = slot;
  ch.geo = g;

  const CVec r = ula_response(std::cos(g.zeta), M, cfg.rhs_spacing, lam);
  const CVec t = ula_response(std::sin(g.xi), Nt, cfg.bs_spacing, lam);
  ch.bs_rhs = std::sqrt(path_gain(g.d_br, PL, beta)) * (r.conjugate() * t.transpose());

  const cd glob = std::polar(1.0, -2.0 * kPi * g.d_jr / lam);
  ch.jam_rhs = std::sqrt(path_gain(g.d_jr, PL, beta)) * glob * ula_response(std::cos(g.omega), M, cfg.rhs_spacing, lam);

  for (int k = 0; k < K; ++k) {
    ch.rhs_user.push_back(std::sqrt(path_gain(g.d_rk[k], PL, beta)) *
                          ula_response(std::cos(g.phi[k]), M, cfg.rhs_spacing, lam));
    const Vec2& u = cfg.user_pos[k];
    const double sin_psi = std::abs(cfg.bs_pos.y() - u.y()) / g.d_bk[k];
    const CVec los = ula_response(sin_psi, Nt, cfg.bs_spacing, lam);
    CVec hb(Nt);
    for (int i = 0; i < Nt; ++i) {
      Rng rng = fading_stream(seed, slot, kBsUser, k * 4096 + i);
      hb(i) = rician_fade(los(i), cfg.rician_factor, rng);
    }
    ch.bs_user.push_back(std::sqrt(path_gain(g.d_bk[k], PL, beta)) * hb);
    Rng rj = fading_stream(seed, slot, kJamUser, k);
    ch.jam_user.push_back(std::sqrt(path_gain(g.d_jk[k], PL, beta)) * rician_fade(cd(1.0, 0.0), cfg.rician_factor, rj));
  }
  Rng rt = fading_stream(seed, slot, kJamTarget, 0);
  ch.jam_target = std::sqrt(path_gain(g.d_jt, PL, beta)) * rician_fade(cd(1.0, 0.0), cfg.rician_factor, rt);

  ch.rhs_target_steer = steering_vector(g.varsigma, M, cfg.element_spacing_ratio);
  ch.rhs_target =
      std::sqrt(path_gain(g.d_rt, PL, beta)) * ula_response(std::cos(g.varsigma), M, cfg.rhs_spacing, lam);
  return ch;
}

}  // namespace rhosi
