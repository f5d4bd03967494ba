#include <benchmark/benchmark.h>

#include "rhosi/bench.hpp"
#include "rhosi/beamform.hpp"
#include "rhosi/phaseshift.hpp"
#include "rhosi/rhosi.hpp"
#include "rhosi/trajectory.hpp"

using namespace rhosi;

namespace {

ScenarioConfig short_horizon(int slots) {
  ScenarioConfig cfg = with_seed(default_scenario(), 1);
  cfg.horizon_slots = slots;
  cfg.total_time = slots * cfg.slot_duration;
  return cfg;
}

}  // namespace

static void BM_AssembleChannels(benchmark::State& state) {
  ScenarioConfig cfg = short_horizon(1);
  cfg.num_elements = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_channels(cfg, Vec2(10.0, -20.0), 0));
}
BENCHMARK(BM_AssembleChannels)->Arg(20)->Arg(80);

static void BM_ConicSocp(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  conic::Problem p;
  std::vector<conic::Var> x;
  for (int i = 0; i < n; ++i) x.push_back(p.add_var());
  conic::Var t = p.add_var();
  conic::Expr obj = t;
  std::vector<conic::Expr> xs;
  for (int i = 0; i < n; ++i) {
    obj.add(x[i], 1.0 / (i + 1));
    xs.push_back(conic::Expr(x[i]) - 1.0);
  }
  p.add_soc(t, xs);
  p.minimize(obj);
  for (auto _ : state) benchmark::DoNotOptimize(conic::solve(p));
}
BENCHMARK(BM_ConicSocp)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_BeamformingSca(benchmark::State& state) {
  const ScenarioConfig cfg = short_horizon(1);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  const auto pc = matched_phases(ch, 0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_beamforming_sca(ch, pc, cfg));
}
BENCHMARK(BM_BeamformingSca)->Unit(benchmark::kMillisecond);

static void BM_PhasePenalty(benchmark::State& state) {
  ScenarioConfig cfg = short_horizon(1);
  cfg.num_elements = static_cast<int>(state.range(0));
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  const auto pc = matched_phases(ch, 0);
  const auto beams = solve_beamforming_sca(ch, pc, cfg).beams;
  PhaseOptions opt = phase_options(cfg);
  opt.inner_max = 3;
  for (auto _ : state) benchmark::DoNotOptimize(solve_phase_penalty(ch, beams, cfg, opt, &pc));
}
BENCHMARK(BM_PhasePenalty)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_TrajectorySca(benchmark::State& state) {
  const ScenarioConfig cfg = short_horizon(static_cast<int>(state.range(0)));
  const SolutionBundle s = initial_solution(cfg);
  const auto opt = trajectory_options(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(solve_trajectory_sca(cfg, s.phases, s.beams, s.traj, opt));
}
BENCHMARK(BM_TrajectorySca)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_RunRhosi(benchmark::State& state) {
  const ScenarioConfig cfg = short_horizon(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_rhosi(cfg));
}
BENCHMARK(BM_RunRhosi)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_OracleGrid(benchmark::State& state) {
  ScenarioConfig cfg = short_horizon(1);
  cfg.num_antennas = 2;
  cfg.num_users = 1;
  cfg.num_elements = 2;
  cfg = with_seed(cfg, 1);
  for (auto _ : state) benchmark::DoNotOptimize(oracle_grid_search(cfg, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_OracleGrid)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
