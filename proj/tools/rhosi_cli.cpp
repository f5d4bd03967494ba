#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rhosi/bench.hpp"
#include "rhosi/rhosi.hpp"

using namespace rhosi;

namespace {

// "4..9" expands to 4, 5, ..., 9; otherwise a comma-separated list.
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = std::stod(text.substr(0, dots));
    const double hi = std::stod(text.substr(dots + 2));
    if (hi < lo) throw ArgumentError("empty range '" + text + "'");
    for (double v = lo; v <= hi + 1e-9; v += 1.0) out.push_back(v);
    return out;
  }
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (out.empty()) throw ArgumentError("no sweep values given");
  return out;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ScenarioConfig cfg = path.empty() ? default_scenario() : load_scenario_file(path);
  return apply_overrides(cfg, overrides);
}

int print_violations(const ValidationReport& rep) {
  for (const auto& v : rep) std::cerr << "invalid " << v.field << ": " << v.message << "\n";
  return rep.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint beam, RHS phase and UAV trajectory design for anti-jamming ISAC"};
  app.require_subcommand(1);

  std::string scenario;
  std::vector<std::string> overrides;
  int seeds = 1;
  std::string variant = "rhosi";
  std::string out;
  std::string axis = "antennas";
  std::string values = "4..9";
  std::string format = "csv";
  int workers = 0;
  bool timing = false;
  bool random_phases = false;
  int resolution = 8;

  auto add_common = [&](CLI::App* sc) {
    sc->add_option("--scenario", scenario, "scenario file (key = value lines)");
    sc->add_option("--set", overrides, "override, e.g. --set \"rate_min = 0.5\"");
  };

  auto* run = app.add_subcommand("run", "run one variant for seeds 1..N and print the iteration log");
  add_common(run);
  run->add_option("--seeds", seeds, "number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--variant", variant, "rhosi | discrete_phases | random_deployment");
  run->add_option("--out", out, "write the iteration log here instead of stdout");

  auto* sweep = app.add_subcommand("sweep", "sweep an axis and emit per-seed results");
  add_common(sweep);
  sweep->add_option("--axis", axis, "antennas | jam_power");
  sweep->add_option("--values", values, "comma list or a..b range");
  sweep->add_option("--variant", variant, "rhosi | discrete_phases | random_deployment");
  sweep->add_option("--seeds", seeds, "seeds per point")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "output path")->required();
  sweep->add_option("--format", format, "csv | chart");
  sweep->add_option("--workers", workers, "worker threads (0: all cores)");
  sweep->add_flag("--timing", timing, "fill runtime_s with wall time (breaks byte-identical output)");
  sweep->add_flag("--random-phases", random_phases, "random deployment also fixes random phases");

  auto* oracle = app.add_subcommand("oracle", "grid search on a tiny single-slot instance");
  add_common(oracle);
  oracle->add_option("--resolution", resolution, "grid resolution")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check a scenario file");
  add_common(validate);

  CLI11_PARSE(app, argc, argv);

  try {
    const ScenarioConfig cfg = apply_env_seed(load_config(scenario, overrides));
    if (int rc = print_violations(validate_scenario(cfg)); rc != 0) return rc;

    if (*validate) {
      std::cout << "scenario ok\n";
      return 0;
    }

    if (*run) {
      const Variant var = parse_variant(variant);
      std::ofstream file;
      if (!out.empty()) {
        file.open(out);
        if (!file) throw Error("cannot write '" + out + "'");
      }
      std::ostream& os = out.empty() ? std::cout : file;
      int rc = 0;
      for (int s = 1; s <= seeds; ++s) {
        const std::uint64_t seed = seeds == 1 ? cfg.seed : static_cast<std::uint64_t>(s);
        if (var == Variant::Rhosi) {
          const auto tr = run_rhosi(with_seed(cfg, seed));
          os << "seed " << seed << "\n" << format_trace(tr);
          if (tr.failed) rc = 1;
        } else {
          const auto m = run_variant(var, cfg, seed);
          char buf[200];
          std::snprintf(buf, sizeof buf, "seed %llu %s ok %d obj %.9g rate %.6g echo_db %.6g %s\n",
                        static_cast<unsigned long long>(seed), to_string(var).c_str(), m.ok ? 1 : 0, m.objective_w,
                        m.sum_rate_bpshz, m.echo_sinr_db, m.diagnostic.c_str());
          os << buf;
          if (!m.ok) rc = 1;
        }
      }
      return rc;
    }

    if (*sweep) {
      SweepSpec spec;
      spec.axis = parse_axis(axis);
      spec.values = parse_values(values);
      spec.base = cfg;
      spec.seeds = seeds;
      spec.variant = parse_variant(variant);
      spec.out_path = out;
      spec.workers = workers;
      spec.record_runtime = timing;
      spec.randomize_phases = random_phases;
      const auto res = run_sweep(spec);
      emit_results(res, parse_format(format), out);
      int flagged = 0;
      for (const auto& p : res.points) {
        std::printf("%s=%g ok %d/%d objective %.6f W sum_rate %.4f bps/Hz%s\n", to_string(res.axis).c_str(), p.value,
                    p.ok_seeds, seeds, p.mean_objective, p.mean_rate, p.flagged ? " FLAGGED" : "");
        if (p.flagged) ++flagged;
      }
      return flagged == 0 ? 0 : 1;
    }

    if (*oracle) {
      const auto r = oracle_grid_search(cfg, resolution);
      if (!r.feasible) {
        std::cout << "no feasible grid point\n";
        return 1;
      }
      std::printf("objective %.9g W transmit %.9g W at (%.2f, %.2f) after %lld evaluations\n", r.objective, r.transmit,
                  r.position.x(), r.position.y(), r.evaluated);
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
