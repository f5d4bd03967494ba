#include "rhosi/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rhosi {

PhaseConfig phases_from_theta(const CVec& theta) {
  PhaseConfig pc;
  pc.theta = theta;
  pc.omega = theta * theta.adjoint();
  return pc;
}

PhaseConfig unit_phases(int M) { return phases_from_theta(CVec::Ones(M)); }

namespace {

void check_dims(const ChannelSet& chs, const CVec& theta, const Beams* beams) {
  if (theta.size() != chs.bs_rhs.rows()) throw ArgumentError("phase vector length does not match the RHS size");
  if (beams) {
    for (const auto& w : *beams) {
      if (w.size() != chs.bs_rhs.cols()) throw ArgumentError("beam length does not match the antenna count");
    }
  }
}

}  // namespace

Eigen::RowVectorXcd composite_bs(const ChannelSet& chs, const CVec& theta, int user) {
  check_dims(chs, theta, nullptr);
  const CVec& hr = chs.rhs_user.at(user);
  Eigen::RowVectorXcd cas = (hr.conjugate().cwiseProduct(theta)).transpose() * chs.bs_rhs;
  return chs.bs_user.at(user).adjoint() + cas;
}

cd composite_jam(const ChannelSet& chs, const CVec& theta, int user) {
  check_dims(chs, theta, nullptr);
  const CVec& hr = chs.rhs_user.at(user);
  return chs.jam_user.at(user) + ((hr.conjugate().cwiseProduct(theta)).transpose() * chs.jam_rhs)(0);
}

Eigen::RowVectorXcd echo_row(const ChannelSet& chs, const CVec& theta) {
  check_dims(chs, theta, nullptr);
  return (chs.rhs_target_steer.conjugate().cwiseProduct(theta)).transpose() * chs.bs_rhs;
}

cd echo_jam(const ChannelSet& chs, const CVec& theta) {
  check_dims(chs, theta, nullptr);
  return chs.jam_target + ((chs.rhs_target_steer.conjugate().cwiseProduct(theta)).transpose() * chs.jam_rhs)(0);
}

double comm_sinr(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, int user,
                 const ScenarioConfig& cfg) {
  check_dims(chs, phases.theta, &beams);
  if (user < 0 || user >= static_cast<int>(beams.size())) throw ArgumentError("user index out of range");
  const auto h = composite_bs(chs, phases.theta, user);
  double sig = 0.0, interf = 0.0;
  for (size_t i = 0; i < beams.size(); ++i) {
    const double p = std::norm((h * beams[i])(0));
    if (static_cast<int>(i) == user) {
      sig = p;
    } else {
      interf += p;
    }
  }
  const double jam = cfg.jam_power * std::norm(composite_jam(chs, phases.theta, user));
  return sig / (interf + jam + cfg.noise_power);
}

std::vector<double> comm_sinrs(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams,
                               const ScenarioConfig& cfg) {
  std::vector<double> s;
  for (int k = 0; k < static_cast<int>(beams.size()); ++k) s.push_back(comm_sinr(chs, phases, beams, k, cfg));
  return s;
}

double sum_rate(const std::vector<double>& sinrs) {
  double r = 0.0;
  for (double g : sinrs) {
    if (g < 0.0 || std::isnan(g)) throw ArgumentError("SINR must be nonnegative");
    r += std::log2(1.0 + g);
  }
  return r;
}

double beampattern_gain(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, double angle,
                        double spacing_ratio) {
  check_dims(chs, phases.theta, &beams);
  const CVec a = steering_vector(angle, static_cast<int>(phases.theta.size()), spacing_ratio);
  Eigen::RowVectorXcd row = (a.conjugate().cwiseProduct(phases.theta)).transpose() * chs.bs_rhs;
  double g = 0.0;
  for (const auto& w : beams) g += std::norm((row * w)(0));
  return g;
}

double beampattern_gain(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams) {
  check_dims(chs, phases.theta, &beams);
  const auto row = echo_row(chs, phases.theta);
  double g = 0.0;
  for (const auto& w : beams) g += std::norm((row * w)(0));
  return g;
}

double echo_sinr(const ChannelSet& chs, const PhaseConfig& phases, const Beams& beams, const ScenarioConfig& cfg) {
  const double g = beampattern_gain(chs, phases, beams);
  return g / (cfg.jam_power * std::norm(echo_jam(chs, phases.theta)) + cfg.noise_power);
}

double profile_power(double speed, const AeroParams& a) {
  const double tip = a.blade_angular_speed * a.rotor_radius;
  return a.blade_power * (1.0 + 3.0 * speed * speed / (tip * tip));
}

double parasite_power(double speed, const AeroParams& a) {
  return 0.5 * a.fuselage_drag_ratio * a.air_density * a.rotor_solidity * a.disc_area * speed * speed * speed;
}

double induced_power(double speed, const AeroParams& a) {
  const double v0 = a.mean_induced_velocity;
  const double s2 = speed * speed / (v0 * v0);
  return a.induced_power * std::sqrt(std::sqrt(1.0 + 0.25 * s2 * s2) - 0.5 * s2);
}

double aero_power(const Vec2& v, const AeroParams& a) {
  const double s = v.norm();
  return profile_power(s, a) + parasite_power(s, a) + induced_power(s, a);
}

double min_power_speed(const AeroParams& a, double vmax) {
  auto f = [&](double s) { return profile_power(s, a) + parasite_power(s, a) + induced_power(s, a); };
  const int grid = 400;
  int best = 0;
  for (int i = 1; i <= grid; ++i) {
    if (f(vmax * i / grid) < f(vmax * best / grid)) best = i;
  }
  double lo = vmax * std::max(0, best - 1) / grid, hi = vmax * std::min(grid, best + 1) / grid;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

double transmit_power(const Beams& beams) {
  double p = 0.0;
  for (const auto& w : beams) p += w.squaredNorm();
  return p;
}

double constant_power(const ScenarioConfig& cfg) {
  return (cfg.num_antennas + 1) * cfg.circuit_power + cfg.jam_power;
}

double total_power(const Beams& beams, const Vec2& v, const ScenarioConfig& cfg) {
  return cfg.pa_inefficiency * transmit_power(beams) + aero_power(v, cfg.aero) + constant_power(cfg);
}

double average_total_power(const SolutionBundle& sol, const ScenarioConfig& cfg) {
  const size_t N = sol.beams.size();
  if (N == 0) return 0.0;
  double s = 0.0;
  for (size_t n = 0; n < N; ++n) s += total_power(sol.beams[n], sol.traj.v.at(n), cfg);
  return s / static_cast<double>(N);
}

FeasibilityReport check_feasibility(const SolutionBundle& sol, const std::vector<ChannelSet>& chs,
                                    const ScenarioConfig& cfg, double tol) {
  FeasibilityReport rep;
  const int N = static_cast<int>(sol.beams.size());
  auto add = [&](const char* fam, int n, double s) {
    rep.slacks.push_back({fam, n, s});
    if (-s > rep.worst_violation) {
      rep.worst_violation = -s;
      rep.worst_family = fam;
      rep.worst_slot = n;
    }
  };
  const double rate_scale = std::max(cfg.rate_min, 1.0);
  const double echo_scale = cfg.echo_sinr_min > 0.0 ? cfg.echo_sinr_min : 1.0;
  for (int n = 0; n < N; ++n) {
    const auto& w = sol.beams[n];
    const auto& pc = sol.phases.at(n);
    const auto& ch = chs.at(n);
    add("19b", n, (cfg.bs_power_max - transmit_power(w)) / cfg.bs_power_max);
    add("19c", n, (sum_rate(comm_sinrs(ch, pc, w, cfg)) - cfg.rate_min) / rate_scale);
    add("19d", n, (echo_sinr(ch, pc, w, cfg) - cfg.echo_sinr_min) / echo_scale);
    const Vec2& q = sol.traj.q.at(n);
    const Vec2& v = sol.traj.v.at(n);
    add("19e", n, (cfg.service_radius - q.norm()) / cfg.service_radius);
    if (n + 1 < N) {
      const double step = (sol.traj.q.at(n + 1) - q).norm();
      add("19f", n, (v.norm() * cfg.slot_duration - step) / (cfg.v_max * cfg.slot_duration));
      const double dv = (sol.traj.v.at(n + 1) - v).norm();
      add("19g", n, (cfg.a_max * cfg.slot_duration - dv) / (cfg.a_max * cfg.slot_duration));
    }
    add("19h", n, (cfg.v_max - v.norm()) / cfg.v_max);
    double dev = 0.0;
    for (Eigen::Index m = 0; m < pc.theta.size(); ++m) dev = std::max(dev, std::abs(std::abs(pc.theta(m)) - 1.0));
    add("19i", n, -dev);
  }
  rep.feasible = rep.worst_violation <= tol;
  return rep;
}

FeasibilityReport check_feasibility(const SolutionBundle& sol, const ScenarioConfig& cfg, double tol) {
  std::vector<ChannelSet> chs;
  for (int n = 0; n < static_cast<int>(sol.beams.size()); ++n) {
    chs.push_back(assemble_channels(cfg, sol.traj.q.at(n), n));
  }
  return check_feasibility(sol, chs, cfg, tol);
}

}  // namespace rhosi
