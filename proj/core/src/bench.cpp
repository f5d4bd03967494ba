#include "rhosi/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace rhosi {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw SchemaError("malformed " + what + " '" + s + "'", 0, what);
  return x;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Trajectory parked_trajectory(const ScenarioConfig& cfg, const Vec2& q) {
  Trajectory t = initial_trajectory(cfg);
  for (auto& p : t.q) p = q;
  return t;
}

std::vector<PhaseConfig> random_phases(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x9e3779b97f4a7c15ULL));
  std::vector<PhaseConfig> out;
  for (int n = 0; n < cfg.horizon_slots; ++n) {
    CVec th(cfg.num_elements);
    for (int m = 0; m < cfg.num_elements; ++m) th(m) = std::polar(1.0, 2.0 * kPi * rng.uniform());
    out.push_back(phases_from_theta(th));
  }
  return out;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Rhosi: return "rhosi";
    case Variant::DiscretePhases: return "discrete_phases";
    case Variant::RandomDeployment: return "random_deployment";
  }
  return "?";
}

std::string to_string(Axis a) { return a == Axis::Antennas ? "antennas" : "jam_power"; }

Variant parse_variant(const std::string& s) {
  if (s == "rhosi") return Variant::Rhosi;
  if (s == "discrete_phases" || s == "discrete") return Variant::DiscretePhases;
  if (s == "random_deployment" || s == "random") return Variant::RandomDeployment;
  throw ArgumentError("unknown variant '" + s + "' (rhosi, discrete_phases, random_deployment)");
}

Axis parse_axis(const std::string& s) {
  if (s == "antennas") return Axis::Antennas;
  if (s == "jam_power") return Axis::JamPower;
  throw ArgumentError("unknown axis '" + s + "' (antennas, jam_power)");
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "chart") return OutputFormat::Chart;
  throw ArgumentError("unknown format '" + s + "' (csv, chart)");
}

ScenarioConfig apply_axis(ScenarioConfig cfg, Axis axis, double value) {
  if (axis == Axis::Antennas) {
    if (value < 1.0 || value != std::floor(value)) throw ArgumentError("antenna count must be a positive integer");
    cfg.num_antennas = static_cast<int>(value);
  } else {
    if (!(value >= 0.0)) throw ArgumentError("jamming power must be nonnegative");
    cfg.jam_power = value;
  }
  return cfg;
}

ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const std::vector<std::string>& overrides) {
  if (overrides.empty()) return cfg;
  std::string text = serialize_scenario(cfg);
  for (const auto& o : overrides) text += o + "\n";
  return load_scenario(text);
}

double full_power_sum_rate(const SolutionBundle& sol, const ScenarioConfig& cfg) {
  const int N = static_cast<int>(sol.beams.size());
  if (N == 0) return 0.0;
  double total = 0.0;
  for (int n = 0; n < N; ++n) {
    Beams w = sol.beams[n];
    const double p = transmit_power(w);
    if (p > 0.0) {
      for (auto& b : w) b *= std::sqrt(cfg.bs_power_max / p);
    }
    const auto ch = assemble_channels(cfg, sol.traj.q[n], n);
    total += sum_rate(comm_sinrs(ch, sol.phases[n], w, cfg));
  }
  return total / N;
}

RunMetrics evaluate_solution(const SolutionBundle& sol, const ScenarioConfig& cfg) {
  RunMetrics m;
  m.ok = true;
  m.objective_w = average_total_power(sol, cfg);
  m.sum_rate_bpshz = full_power_sum_rate(sol, cfg);
  double echo = 0.0;
  const int N = static_cast<int>(sol.beams.size());
  for (int n = 0; n < N; ++n) {
    const auto ch = assemble_channels(cfg, sol.traj.q[n], n);
    echo += echo_sinr(ch, sol.phases[n], sol.beams[n], cfg);
  }
  m.echo_sinr_db = linear_to_db(echo / std::max(N, 1));
  m.solution = sol;
  return m;
}

Vec2 random_deployment_position(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5851f42d4c957f2dULL));
  const double r = cfg.service_radius * std::sqrt(rng.uniform());
  const double a = 2.0 * kPi * rng.uniform();
  return {r * std::cos(a), r * std::sin(a)};
}

RunMetrics run_variant(Variant variant, const ScenarioConfig& cfg_in, std::uint64_t seed, bool randomize_phases) {
  const auto t0 = Clock::now();
  const ScenarioConfig cfg = with_seed(cfg_in, seed);
  RunMetrics m;
  AoOptions opt = ao_options(cfg);
  if (variant == Variant::RandomDeployment) {
    opt.start_trajectory = parked_trajectory(cfg, random_deployment_position(cfg, seed));
    opt.optimize_positions = false;
    if (randomize_phases) {
      opt.start_phases = random_phases(cfg, seed);
      opt.optimize_phases = false;
    }
  }
  const AoTrace tr = run_rhosi(cfg, opt);
  if (tr.failed) {
    m.diagnostic = tr.diagnostic;
    m.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return m;
  }
  SolutionBundle sol = tr.solution;
  if (variant == Variant::DiscretePhases) {
    for (int n = 0; n < cfg.horizon_slots; ++n) {
      const PhaseConfig q = quantize_phases(sol.phases[n], cfg.algo.phase_bits);
      if ((q.theta - sol.phases[n].theta).cwiseAbs().maxCoeff() <= 1e-12) continue;
      const auto ch = assemble_channels(cfg, sol.traj.q[n], n);
      try {
        auto bs = solve_beamforming_sca(ch, q, cfg, &sol.beams[n]);
        sol.phases[n] = q;
        sol.beams[n] = std::move(bs.beams);
      } catch (const InfeasibleError& e) {
        m.diagnostic = std::string("quantized phases infeasible in slot ") + std::to_string(n) + " [" + e.family + "]";
        m.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
        return m;
      }
    }
    const auto rep = check_feasibility(sol, cfg, cfg.algo.feas_tol);
    if (!rep.feasible) {
      m.diagnostic = "quantized solution violates " + rep.worst_family + " in slot " + std::to_string(rep.worst_slot);
      m.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
      return m;
    }
  }
  m = evaluate_solution(sol, cfg);
  m.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return m;
}

RunMetrics run_baseline(Variant variant, const ScenarioConfig& cfg, std::uint64_t seed, bool randomize_phases) {
  if (variant == Variant::Rhosi) throw ArgumentError("run_baseline expects discrete_phases or random_deployment");
  return run_variant(variant, cfg, seed, randomize_phases);
}

std::vector<SweepPoint> aggregate(const std::vector<SweepRow>& rows, const std::vector<double>& values) {
  std::vector<SweepPoint> pts;
  for (double v : values) {
    SweepPoint p;
    p.value = v;
    std::vector<double> obj, rate;
    for (const auto& r : rows) {
      if (r.value == v && r.ok) {
        obj.push_back(r.objective_w);
        rate.push_back(r.sum_rate_bpshz);
      }
    }
    p.ok_seeds = static_cast<int>(obj.size());
    p.flagged = obj.empty();
    auto stats = [](const std::vector<double>& x, double& mean, double& sd) {
      mean = 0.0;
      sd = 0.0;
      if (x.empty()) return;
      for (double a : x) mean += a;
      mean /= x.size();
      if (x.size() > 1) {
        for (double a : x) sd += (a - mean) * (a - mean);
        sd = std::sqrt(sd / (x.size() - 1));
      }
    };
    stats(obj, p.mean_objective, p.std_objective);
    stats(rate, p.mean_rate, p.std_rate);
    pts.push_back(p);
  }
  return pts;
}

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw ArgumentError("sweep needs at least one value");
  if (spec.seeds < 1) throw ArgumentError("sweep needs at least one seed");
  const auto t0 = Clock::now();
  const ScenarioConfig base = apply_overrides(spec.base, spec.overrides);
  const int nv = static_cast<int>(spec.values.size());
  const int jobs = nv * spec.seeds;
  std::vector<SweepRow> rows(jobs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int j = next++; j < jobs; j = next++) {
      SweepRow& r = rows[j];
      r.axis = spec.axis;
      r.value = spec.values[j / spec.seeds];
      r.variant = spec.variant;
      r.seed = static_cast<std::uint64_t>(j % spec.seeds + 1);
      try {
        const auto cfg = apply_axis(base, spec.axis, r.value);
        const auto m = run_variant(spec.variant, cfg, r.seed, spec.randomize_phases);
        r.ok = m.ok;
        r.runtime_s = spec.record_runtime ? m.runtime_s : 0.0;
        if (m.ok) {
          r.objective_w = m.objective_w;
          r.sum_rate_bpshz = m.sum_rate_bpshz;
          r.echo_sinr_db = m.echo_sinr_db;
        }
      } catch (const Error&) {
        r.ok = false;
      }
      if (!r.ok) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.objective_w = r.sum_rate_bpshz = r.echo_sinr_db = nan;
      }
    }
  };
  int nw = spec.workers > 0 ? spec.workers : static_cast<int>(std::thread::hardware_concurrency());
  nw = std::clamp(nw, 1, jobs);
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  SweepResult res;
  res.axis = spec.axis;
  res.variant = spec.variant;
  res.rows = std::move(rows);
  res.points = aggregate(res.rows, spec.values);
  res.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

std::string results_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += to_string(r.axis) + "=" + fmt_double(r.value) + "," + to_string(r.variant) + "," + std::to_string(r.seed) +
           "," + fmt_double(r.objective_w) + "," + fmt_double(r.sum_rate_bpshz) + "," + fmt_double(r.echo_sinr_db) +
           "," + fmt_double(r.runtime_s) + "\n";
  }
  return out;
}

std::vector<SweepRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || split(line, ',').size() != 7 ||
      line.substr(0, std::string(kCsvHeader).size()) != kCsvHeader) {
    throw SchemaError("missing or unexpected CSV header", 1, "header");
  }
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw SchemaError("line " + std::to_string(line_no) + ": expected 7 fields", line_no, "row");
    SweepRow r;
    const auto eq = f[0].find('=');
    if (eq == std::string::npos) throw SchemaError("line " + std::to_string(line_no) + ": bad axis field", line_no, "axis");
    r.axis = parse_axis(f[0].substr(0, eq));
    r.value = parse_double(f[0].substr(eq + 1), "axis value");
    r.variant = parse_variant(f[1]);
    r.seed = std::stoull(f[2]);
    r.objective_w = parse_double(f[3], "objective_w");
    r.sum_rate_bpshz = parse_double(f[4], "sum_rate_bpshz");
    r.echo_sinr_db = parse_double(f[5], "echo_sinr_db");
    r.runtime_s = parse_double(f[6], "runtime_s");
    r.ok = std::isfinite(r.objective_w);
    rows.push_back(r);
  }
  return rows;
}

std::string results_chart(const SweepResult& result) {
  const bool rate = result.axis == Axis::JamPower;
  const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : result.points) {
    if (!p.flagged) pts.emplace_back(p.value, rate ? p.mean_rate : p.mean_objective);
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string ylabel = rate ? "sum rate [bps/Hz]" : "average power [W]";
  const std::string xlabel = result.axis == Axis::Antennas ? "number of BS antennas" : "jamming power [W]";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << to_string(result.variant)
     << ": " << ylabel << " vs " << xlabel << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
     << H / 2 << ")\">" << ylabel << "</text>\n";
  if (!pts.empty()) {
    double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 - x0 <= 0.0) x1 = x0 + 1.0;
    const double pad = y1 - y0 > 0.0 ? 0.1 * (y1 - y0) : std::max(1e-3, 0.05 * std::abs(y0));
    y0 -= pad;
    y1 += pad;
    auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto sy = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    char buf[64];
    for (const auto& [x, y] : pts) {
      std::snprintf(buf, sizeof buf, "%g", x);
      os << "<text x=\"" << sx(x) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << buf
         << "</text>\n";
    }
    for (double y : {y0, 0.5 * (y0 + y1), y1}) {
      std::snprintf(buf, sizeof buf, "%.4g", y);
      os << "<text x=\"" << ml - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << buf
         << "</text>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) os << sx(x) << "," << sy(y) << " ";
    os << "\"/>\n";
    for (const auto& [x, y] : pts) {
      os << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3.5\" fill=\"#1f5fbf\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void emit_results(const SweepResult& result, OutputFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << (format == OutputFormat::Csv ? results_csv(result.rows) : results_chart(result));
  if (!f) throw Error("write failed for '" + path + "'");
}

OracleResult oracle_grid_search(const ScenarioConfig& cfg, int resolution) {
  if (cfg.num_antennas > 2 || cfg.num_users != 1 || cfg.num_elements > 3 || cfg.horizon_slots != 1) {
    throw ArgumentError("grid oracle needs N_t <= 2, K = 1, M <= 3 and a single slot");
  }
  if (resolution < 1) throw ArgumentError("grid resolution must be positive");
  const int Nt = cfg.num_antennas, M = cfg.num_elements;
  const int levels = 2 * resolution;
  std::vector<CVec> dirs;
  if (Nt == 1) {
    dirs.push_back(CVec::Ones(1));
  } else {
    for (int i = 0; i <= resolution; ++i) {
      const double a = 0.5 * kPi * i / resolution;
      for (int j = 0; j < (i == 0 ? 1 : levels); ++j) {
        CVec u(2);
        u << std::cos(a), std::polar(std::sin(a), 2.0 * kPi * j / levels);
        dirs.push_back(u);
      }
    }
  }
  const double need_sinr = std::pow(2.0, cfg.rate_min) - 1.0;
  const double fixed = min_power_speed(cfg.aero, cfg.v_max);
  const double constant = aero_power(Vec2(fixed, 0.0), cfg.aero) + constant_power(cfg);

  OracleResult best;
  double best_p = std::numeric_limits<double>::infinity();
  const double step = cfg.service_radius / resolution;
  int combos = 1;
  for (int m = 0; m < M; ++m) combos *= levels;
  for (int ix = -resolution; ix <= resolution; ++ix) {
    for (int iy = -resolution; iy <= resolution; ++iy) {
      const Vec2 q(ix * step, iy * step);
      if (q.norm() > cfg.service_radius * (1.0 + 1e-12)) continue;
      const auto ch = assemble_channels(cfg, q, 0);
      for (int c = 0; c < combos; ++c) {
        CVec th(M);
        for (int m = 0, r = c; m < M; ++m, r /= levels) th(m) = std::polar(1.0, 2.0 * kPi * (r % levels) / levels);
        const Eigen::RowVectorXcd h = composite_bs(ch, th, 0);
        const double varpi = cfg.jam_power * std::norm(composite_jam(ch, th, 0)) + cfg.noise_power;
        const double a = need_sinr * varpi;
        double b = 0.0;
        Eigen::RowVectorXcd g;
        if (cfg.echo_sinr_min > 0.0) {
          g = echo_row(ch, th);
          b = cfg.echo_sinr_min * (cfg.jam_power * std::norm(echo_jam(ch, th)) + cfg.noise_power);
        }
        for (const auto& u : dirs) {
          ++best.evaluated;
          double p = 0.0;
          if (a > 0.0) {
            const double gh = std::norm((h * u)(0));
            if (!(gh > 0.0)) continue;
            p = a / gh;
          }
          if (b > 0.0) {
            const double gg = std::norm((g * u)(0));
            if (!(gg > 0.0)) continue;
            p = std::max(p, b / gg);
          }
          if (p > cfg.bs_power_max || !(p < best_p)) continue;
          best_p = p;
          best.feasible = true;
          best.position = q;
          best.theta = th;
          best.beam = std::sqrt(p) * u;
        }
      }
    }
  }
  if (best.feasible) {
    best.transmit = best_p;
    best.objective = cfg.pa_inefficiency * best_p + constant;
  }
  return best;
}

}  // namespace rhosi
