#include "rhosi/rhosi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rhosi {

namespace {

using Clock = std::chrono::steady_clock;

bool slot_feasible(const ChannelSet& ch, const PhaseConfig& pc, const Beams& w, const ScenarioConfig& cfg,
                   double tol) {
  if ((transmit_power(w) - cfg.bs_power_max) / cfg.bs_power_max > tol) return false;
  const double rate = sum_rate(comm_sinrs(ch, pc, w, cfg));
  if ((cfg.rate_min - rate) / std::max(cfg.rate_min, 1.0) > tol) return false;
  if (cfg.echo_sinr_min > 0.0 && (cfg.echo_sinr_min - echo_sinr(ch, pc, w, cfg)) / cfg.echo_sinr_min > tol) {
    return false;
  }
  return true;
}

std::vector<ChannelSet> channels_for(const ScenarioConfig& cfg, const Trajectory& traj) {
  std::vector<ChannelSet> chs;
  for (int n = 0; n < static_cast<int>(traj.q.size()); ++n) chs.push_back(assemble_channels(cfg, traj.q[n], n));
  return chs;
}

double mean_transmit(const SolutionBundle& s) {
  double t = 0.0;
  for (const auto& w : s.beams) t += transmit_power(w);
  return t / static_cast<double>(s.beams.size());
}

double mean_aero(const SolutionBundle& s, const ScenarioConfig& cfg) {
  double a = 0.0;
  for (const auto& v : s.traj.v) a += aero_power(v, cfg.aero);
  return a / static_cast<double>(s.traj.v.size());
}

}  // namespace

AoOptions ao_options(const ScenarioConfig& cfg) {
  AoOptions o;
  o.max_outer = cfg.algo.max_outer;
  o.tol_outer = cfg.algo.tol_outer;
  o.step_order = cfg.algo.step_order;
  return o;
}

std::vector<double> AoTrace::objectives() const {
  std::vector<double> out;
  for (const auto& r : records) out.push_back(r.objective);
  return out;
}

SolutionBundle initial_solution(const ScenarioConfig& cfg) { return initial_solution(cfg, initial_trajectory(cfg)); }

SolutionBundle initial_solution(const ScenarioConfig& cfg, const Trajectory& traj,
                                const std::vector<PhaseConfig>* phases) {
  const int N = cfg.horizon_slots;
  if (static_cast<int>(traj.q.size()) != N || static_cast<int>(traj.v.size()) != N) {
    throw ArgumentError("start trajectory must cover the horizon");
  }
  if (phases && static_cast<int>(phases->size()) != N) throw ArgumentError("start phases must cover the horizon");
  SolutionBundle s;
  s.traj = traj;
  for (int n = 0; n < N; ++n) {
    const auto ch = assemble_channels(cfg, s.traj.q[n], n);
    // Phases aligned to each user in turn; the cheapest feasible start wins.
    std::vector<PhaseConfig> options;
    if (phases) {
      options.push_back((*phases)[n]);
    } else {
      for (int k = 0; k < cfg.num_users; ++k) options.push_back(matched_phases(ch, k));
    }
    Beams best;
    int pick = -1;
    for (int i = 0; i < static_cast<int>(options.size()); ++i) {
      Beams w;
      if (!initial_beams(ch, options[i], cfg, w)) continue;
      if (pick < 0 || transmit_power(w) < transmit_power(best)) {
        best = std::move(w);
        pick = i;
      }
    }
    if (pick < 0) {
      throw InfeasibleError("no feasible initial beams in slot " + std::to_string(n),
                            binding_family(ch, options.front(), cfg));
    }
    s.phases.push_back(options[pick]);
    s.beams.push_back(std::move(best));
  }
  return s;
}

AoTrace run_rhosi(const ScenarioConfig& cfg, const AoOptions& opt) {
  for (char c : opt.step_order) {
    if (c != 'b' && c != 'p' && c != 't') throw ArgumentError("step order may only contain b, p and t");
  }
  if (opt.max_outer < 1) throw ArgumentError("max_outer must be at least 1");
  const double tol = cfg.algo.feas_tol;
  AoTrace trace;
  try {
    trace.solution = initial_solution(cfg, opt.start_trajectory ? *opt.start_trajectory : initial_trajectory(cfg),
                                      opt.start_phases ? &*opt.start_phases : nullptr);
  } catch (const InfeasibleError& e) {
    trace.failed = true;
    trace.diagnostic = std::string("initialization: ") + e.what() + " [" + e.family + "]";
    return trace;
  }
  auto& sol = trace.solution;
  const int N = cfg.horizon_slots;
  std::vector<ChannelSet> chs = channels_for(cfg, sol.traj);
  trace.initial_objective = average_total_power(sol, cfg);

  PhaseOptions popt = phase_options(cfg);
  popt.inner_max = opt.phase_inner_max;
  TrajectoryOptions topt = trajectory_options(cfg);
  topt.optimize_positions = opt.optimize_positions;

  double prev = trace.initial_objective;
  for (int s = 1; s <= opt.max_outer; ++s) {
    const auto t0 = Clock::now();
    AoRecord rec;
    rec.iteration = s;
    for (char step : opt.step_order) {
      if (step == 'b') {
        for (int n = 0; n < N; ++n) {
          try {
            auto bs = solve_beamforming_sca(chs[n], sol.phases[n], cfg, &sol.beams[n]);
            rec.beam_iterations += bs.iterations;
            if (slot_feasible(chs[n], sol.phases[n], bs.beams, cfg, tol) &&
                transmit_power(bs.beams) <= transmit_power(sol.beams[n])) {
              sol.beams[n] = std::move(bs.beams);
            } else {
              rec.rejected.push_back("b" + std::to_string(n));
            }
          } catch (const InfeasibleError&) {
            rec.rejected.push_back("b" + std::to_string(n));
          }
        }
      } else if (step == 'p') {
        if (!opt.optimize_phases) continue;
        for (int n = 0; n < N; ++n) {
          try {
            auto pr = solve_phase_penalty(chs[n], sol.beams[n], cfg, popt, &sol.phases[n]);
            rec.phase_solves += pr.solves;
            rec.max_rank_residual = std::max(rec.max_rank_residual, pr.phases.rank_residual);
            if (slot_feasible(chs[n], pr.phases, sol.beams[n], cfg, tol)) {
              sol.phases[n] = std::move(pr.phases);
            } else {
              rec.rejected.push_back("p" + std::to_string(n));
            }
          } catch (const InfeasibleError&) {
            rec.rejected.push_back("p" + std::to_string(n));
          }
        }
      } else {
        auto tr = solve_trajectory_sca(cfg, sol.phases, sol.beams, sol.traj, topt);
        rec.trajectory_iterations += tr.iterations;
        SolutionBundle cand = sol;
        cand.traj = tr.traj;
        const auto cand_chs = channels_for(cfg, cand.traj);
        const auto rep = check_feasibility(cand, cand_chs, cfg, tol);
        if (rep.feasible && mean_aero(cand, cfg) <= mean_aero(sol, cfg)) {
          sol = std::move(cand);
          chs = cand_chs;
        } else {
          rec.rejected.push_back("t");
        }
      }
      rec.step_objectives.push_back(average_total_power(sol, cfg));
    }
    rec.objective = average_total_power(sol, cfg);
    rec.transmit = mean_transmit(sol);
    rec.aero = mean_aero(sol, cfg);
    rec.feasibility = check_feasibility(sol, chs, cfg, tol);
    rec.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    trace.records.push_back(rec);
    if (!rec.feasibility.feasible) {
      trace.failed = true;
      trace.diagnostic = "iteration " + std::to_string(s) + ": constraint " + rec.feasibility.worst_family +
                         " violated in slot " + std::to_string(rec.feasibility.worst_slot);
      return trace;
    }
    if (std::abs(prev - rec.objective) <= opt.tol_outer * std::abs(prev)) {
      trace.converged = true;
      break;
    }
    prev = rec.objective;
  }
  return trace;
}

std::pair<bool, int> verify_monotone(const std::vector<double>& objectives, double tol) {
  for (size_t s = 0; s + 1 < objectives.size(); ++s) {
    if (objectives[s + 1] > objectives[s] + tol) return {false, static_cast<int>(s + 1)};
  }
  return {true, -1};
}

std::pair<bool, int> verify_monotone(const AoTrace& trace, double tol) {
  return verify_monotone(trace.objectives(), tol);
}

std::string format_trace(const AoTrace& trace) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "init obj %.9g\n", trace.initial_objective);
  os << buf;
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf,
                  "iter %d obj %.9g tx %.9g aero %.9g worst %.3g time %.3f beam_sca %d phase_solves %d "
                  "traj_sca %d rank %.3g rejected %zu\n",
                  r.iteration, r.objective, r.transmit, r.aero, -r.feasibility.worst_violation, r.wall_time,
                  r.beam_iterations, r.phase_solves, r.trajectory_iterations, r.max_rank_residual, r.rejected.size());
    os << buf;
  }
  if (trace.failed) os << "failed " << trace.diagnostic << "\n";
  if (trace.converged) os << "converged\n";
  return os.str();
}

}  // namespace rhosi
