#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhosi/rhosi.hpp"

namespace rhosi {

enum class Variant { Rhosi, DiscretePhases, RandomDeployment };
enum class Axis { Antennas, JamPower };
enum class OutputFormat { Csv, Chart };

std::string to_string(Variant v);
std::string to_string(Axis a);
Variant parse_variant(const std::string& s);
Axis parse_axis(const std::string& s);
OutputFormat parse_format(const std::string& s);

// Sets the swept parameter: antennas -> N_t, jam_power -> g_Jam [W].
ScenarioConfig apply_axis(ScenarioConfig cfg, Axis axis, double value);
// Applies "key = value" overrides with the scenario file syntax.
ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const std::vector<std::string>& overrides);

struct SweepSpec {
  Axis axis = Axis::Antennas;
  std::vector<double> values;
  ScenarioConfig base;                 // scenario the overrides and axis values are applied to
  std::vector<std::string> overrides;  // "key = value"
  int seeds = 10;                      // seeds 1..seeds
  Variant variant = Variant::Rhosi;
  std::string out_path;
  int workers = 0;                     // 0: one per hardware thread
  bool record_runtime = false;         // wall time in the runtime_s column (otherwise 0)
  bool randomize_phases = false;       // random deployment also fixes random phases
};

struct RunMetrics {
  bool ok = false;
  double objective_w = 0.0;      // mean total power [W]
  double sum_rate_bpshz = 0.0;   // mean sum rate at full transmit power along the optimized beams
  double echo_sinr_db = 0.0;     // mean echo SINR of the optimized beams [dB]
  double runtime_s = 0.0;
  std::string diagnostic;
  SolutionBundle solution;
};

struct SweepRow {
  Axis axis = Axis::Antennas;
  double value = 0.0;
  Variant variant = Variant::Rhosi;
  std::uint64_t seed = 0;
  double objective_w = 0.0;
  double sum_rate_bpshz = 0.0;
  double echo_sinr_db = 0.0;
  double runtime_s = 0.0;
  bool ok = false;
};

struct SweepPoint {
  double value = 0.0;
  int ok_seeds = 0;
  double mean_objective = 0.0, std_objective = 0.0;
  double mean_rate = 0.0, std_rate = 0.0;
  bool flagged = false;  // no seed produced a feasible solution
};

struct SweepResult {
  Axis axis = Axis::Antennas;
  Variant variant = Variant::Rhosi;
  std::vector<SweepRow> rows;  // value-major, then seed
  std::vector<SweepPoint> points;
  double runtime_s = 0.0;
};

// Mean over slots of the sum rate reached when every slot's beams are scaled to P_max.
double full_power_sum_rate(const SolutionBundle& sol, const ScenarioConfig& cfg);
RunMetrics evaluate_solution(const SolutionBundle& sol, const ScenarioConfig& cfg);

// Uniform point of the service disk drawn from the seed.
Vec2 random_deployment_position(const ScenarioConfig& cfg, std::uint64_t seed);

// cfg is used as given except for the seed, which is applied with with_seed.
RunMetrics run_variant(Variant variant, const ScenarioConfig& cfg, std::uint64_t seed, bool randomize_phases = false);
RunMetrics run_baseline(Variant variant, const ScenarioConfig& cfg, std::uint64_t seed, bool randomize_phases = false);

SweepResult run_sweep(const SweepSpec& spec);
std::vector<SweepPoint> aggregate(const std::vector<SweepRow>& rows, const std::vector<double>& values);

inline constexpr const char* kCsvHeader = "axis,variant,seed,objective_w,sum_rate_bpshz,echo_sinr_db,runtime_s";

// The axis column reads "<axis>=<value>".
std::string results_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_results_csv(const std::string& text);
// Static SVG of the per-point means (objective for antennas, sum rate for jam power).
std::string results_chart(const SweepResult& result);
void emit_results(const SweepResult& result, OutputFormat format, const std::string& path);

struct OracleResult {
  bool feasible = false;
  double objective = 0.0;  // total power [W]
  double transmit = 0.0;   // ||w||^2 [W]
  Vec2 position{0.0, 0.0};
  CVec theta;
  CVec beam;
  long long evaluated = 0;
};

// Exhaustive search for N_t <= 2, K = 1, M <= 3, N = 1: UAV positions on a
// grid of spacing r_0 / resolution, 2 * resolution phase levels per element and
// beam directions on a (resolution + 1) x 2 resolution grid, each with the
// smallest power meeting the rate and echo floors.
OracleResult oracle_grid_search(const ScenarioConfig& cfg, int resolution);

}  // namespace rhosi
