#include "rhosi/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rhosi {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

cd Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::sqrt(0.5), im * std::sqrt(0.5)};
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

void draw_users(ScenarioConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x7573657273ULL));
  cfg.user_pos.clear();
  for (int k = 0; k < cfg.num_users; ++k) {
    const double x = rng.uniform(0.0, cfg.area_side);
    const double y = rng.uniform(0.0, cfg.area_side);
    cfg.user_pos.emplace_back(x, y);
  }
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line, const std::string& key) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw SchemaError("line " + std::to_string(line) + ": key '" + key + "' expects a number, got '" + t + "'",
                      line, key);
  return x;
}

long long parse_int(const std::string& v, int line, const std::string& key) {
  const std::string t = trim(v);
  char* end = nullptr;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw SchemaError("line " + std::to_string(line) + ": key '" + key + "' expects an integer, got '" + t + "'",
                      line, key);
  return x;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw SchemaError("line " + std::to_string(line) + ": key '" + key + "' expects a boolean, got '" + t + "'", line,
                    key);
}

Vec2 parse_vec2(const std::string& v, int line, const std::string& key) {
  const auto comma = v.find(',');
  if (comma == std::string::npos)
    throw SchemaError("line " + std::to_string(line) + ": key '" + key + "' expects 'x, y'", line, key);
  return {parse_double(v.substr(0, comma), line, key), parse_double(v.substr(comma + 1), line, key)};
}

std::string fmt_vec2(const Vec2& p) { return fmt_double(p.x()) + ", " + fmt_double(p.y()); }

enum class Kind { Int, Double, Bool, Vec2Kind, Vec2List, String, U64 };

struct Field {
  Kind kind;
  std::function<void(ScenarioConfig&, const std::string&, int, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<double*(ScenarioConfig&)> dbl;  // only for Double fields
};

#define RHOSI_DBL(name, expr)                                                                          \
  {                                                                                                    \
    name, Field {                                                                                      \
      Kind::Double,                                                                                    \
          [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {                   \
            c.expr = parse_double(v, l, k);                                                            \
          },                                                                                           \
          [](const ScenarioConfig& c) { return fmt_double(c.expr); },                                  \
          [](ScenarioConfig& c) { return &c.expr; }                                                    \
    }                                                                                                  \
  }
#define RHOSI_INT(name, expr)                                                                          \
  {                                                                                                    \
    name, Field {                                                                                      \
      Kind::Int,                                                                                       \
          [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {                   \
            c.expr = static_cast<int>(parse_int(v, l, k));                                             \
          },                                                                                           \
          [](const ScenarioConfig& c) { return std::to_string(c.expr); }, nullptr                      \
    }                                                                                                  \
  }
#define RHOSI_BOOL(name, expr)                                                                         \
  {                                                                                                    \
    name, Field {                                                                                      \
      Kind::Bool,                                                                                      \
          [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {                   \
            c.expr = parse_bool(v, l, k);                                                              \
          },                                                                                           \
          [](const ScenarioConfig& c) { return std::string(c.expr ? "true" : "false"); }, nullptr      \
    }                                                                                                  \
  }
#define RHOSI_VEC2(name, expr)                                                                         \
  {                                                                                                    \
    name, Field {                                                                                      \
      Kind::Vec2Kind,                                                                                  \
          [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {                   \
            c.expr = parse_vec2(v, l, k);                                                              \
          },                                                                                           \
          [](const ScenarioConfig& c) { return fmt_vec2(c.expr); }, nullptr                            \
    }                                                                                                  \
  }

const std::vector<std::pair<std::string, Field>>& field_table() {
  static const std::vector<std::pair<std::string, Field>> table = {
      RHOSI_INT("num_antennas", num_antennas),
      RHOSI_INT("num_users", num_users),
      RHOSI_INT("num_elements", num_elements),
      RHOSI_INT("horizon_slots", horizon_slots),
      RHOSI_DBL("slot_duration", slot_duration),
      RHOSI_DBL("total_time", total_time),
      RHOSI_DBL("area_side", area_side),
      RHOSI_VEC2("bs_pos", bs_pos),
      RHOSI_VEC2("jammer_pos", jammer_pos),
      RHOSI_VEC2("target_pos", target_pos),
      {"user_pos",
       Field{Kind::Vec2List,
             [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {
               c.user_pos.clear();
               std::stringstream ss(v);
               std::string item;
               while (std::getline(ss, item, ';')) {
                 if (trim(item).empty()) continue;
                 c.user_pos.push_back(parse_vec2(item, l, k));
               }
               c.randomize_users = false;
             },
             [](const ScenarioConfig& c) {
               std::string out;
               for (std::size_t i = 0; i < c.user_pos.size(); ++i) {
                 if (i) out += "; ";
                 out += fmt_vec2(c.user_pos[i]);
               }
               return out;
             },
             nullptr}},
      RHOSI_BOOL("randomize_users", randomize_users),
      RHOSI_DBL("uav_altitude", uav_altitude),
      RHOSI_DBL("service_radius", service_radius),
      RHOSI_DBL("carrier_wavelength", carrier_wavelength),
      RHOSI_DBL("rhs_spacing", rhs_spacing),
      RHOSI_DBL("bs_spacing", bs_spacing),
      RHOSI_DBL("element_spacing_ratio", element_spacing_ratio),
      RHOSI_DBL("path_gain_ref", path_gain_ref),
      RHOSI_DBL("path_loss_exp", path_loss_exp),
      RHOSI_DBL("rician_factor", rician_factor),
      RHOSI_DBL("noise_power", noise_power),
      RHOSI_DBL("jam_power", jam_power),
      RHOSI_DBL("bs_power_max", bs_power_max),
      RHOSI_DBL("rate_min", rate_min),
      RHOSI_DBL("echo_sinr_min", echo_sinr_min),
      RHOSI_DBL("v_max", v_max),
      RHOSI_DBL("a_max", a_max),
      RHOSI_DBL("pa_inefficiency", pa_inefficiency),
      RHOSI_DBL("circuit_power", circuit_power),
      RHOSI_DBL("aero.blade_power", aero.blade_power),
      RHOSI_DBL("aero.induced_power", aero.induced_power),
      RHOSI_DBL("aero.blade_angular_speed", aero.blade_angular_speed),
      RHOSI_DBL("aero.rotor_radius", aero.rotor_radius),
      RHOSI_DBL("aero.fuselage_drag_ratio", aero.fuselage_drag_ratio),
      RHOSI_DBL("aero.air_density", aero.air_density),
      RHOSI_DBL("aero.rotor_solidity", aero.rotor_solidity),
      RHOSI_DBL("aero.disc_area", aero.disc_area),
      RHOSI_DBL("aero.mean_induced_velocity", aero.mean_induced_velocity),
      RHOSI_INT("algo.max_outer", algo.max_outer),
      RHOSI_DBL("algo.tol_outer", algo.tol_outer),
      RHOSI_DBL("algo.conic_tol", algo.conic_tol),
      RHOSI_INT("algo.conic_max_iter", algo.conic_max_iter),
      RHOSI_DBL("algo.sca_tol", algo.sca_tol),
      RHOSI_INT("algo.sca_max_iter", algo.sca_max_iter),
      RHOSI_DBL("algo.rank_tol", algo.rank_tol),
      RHOSI_BOOL("algo.randomization_fallback", algo.randomization_fallback),
      RHOSI_INT("algo.randomization_samples", algo.randomization_samples),
      RHOSI_DBL("algo.kappa_start", algo.kappa_start),
      RHOSI_DBL("algo.kappa_factor", algo.kappa_factor),
      RHOSI_DBL("algo.kappa_cap", algo.kappa_cap),
      RHOSI_DBL("algo.phase_slack_weight", algo.phase_slack_weight),
      RHOSI_DBL("algo.trust_radius", algo.trust_radius),
      RHOSI_DBL("algo.traj_slack_weight", algo.traj_slack_weight),
      RHOSI_INT("algo.phase_bits", algo.phase_bits),
      {"algo.step_order",
       Field{Kind::String,
             [](ScenarioConfig& c, const std::string& v, int, const std::string&) { c.algo.step_order = trim(v); },
             [](const ScenarioConfig& c) { return c.algo.step_order; }, nullptr}},
      RHOSI_DBL("algo.feas_tol", algo.feas_tol),
      {"seed",
       Field{Kind::U64,
             [](ScenarioConfig& c, const std::string& v, int l, const std::string& k) {
               const long long s = parse_int(v, l, k);
               if (s < 0) throw SchemaError("line " + std::to_string(l) + ": seed must be non-negative", l, k);
               c.seed = static_cast<std::uint64_t>(s);
             },
             [](const ScenarioConfig& c) { return std::to_string(c.seed); }, nullptr}},
  };
  return table;
}

#undef RHOSI_DBL
#undef RHOSI_INT
#undef RHOSI_BOOL
#undef RHOSI_VEC2

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> a = {
      {"eta", "pa_inefficiency"}, {"beta", "path_loss_exp"}, {"N_t", "num_antennas"},
      {"K", "num_users"},         {"M", "num_elements"},     {"N", "horizon_slots"},
      {"P_circ", "circuit_power"}, {"L", "uav_altitude"},    {"r_0", "service_radius"},
  };
  return a;
}

const Field* find_field(const std::string& name) {
  for (const auto& [n, f] : field_table())
    if (n == name) return &f;
  return nullptr;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  draw_users(cfg);
  return cfg;
}

ValidationReport validate_scenario(const ScenarioConfig& c) {
  ValidationReport r;
  auto need = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) r.push_back({field, msg});
  };
  need(c.num_antennas >= 1, "num_antennas", "num_antennas must be at least 1");
  need(c.num_users >= 1, "num_users", "num_users must be at least 1");
  need(c.num_elements >= 1, "num_elements", "num_elements must be at least 1");
  need(c.horizon_slots >= 1, "horizon_slots", "horizon_slots must be at least 1");
  need(c.slot_duration > 0, "slot_duration", "slot_duration must be positive");
  need(std::abs(c.total_time - c.horizon_slots * c.slot_duration) <= 1e-9 * std::max(1.0, std::abs(c.total_time)),
       "total_time", "total_time must equal horizon_slots * slot_duration");
  need(c.pa_inefficiency > 1.0, "pa_inefficiency", "pa_inefficiency must exceed 1");
  const std::pair<const char*, double> positives[] = {
      {"area_side", c.area_side},
      {"uav_altitude", c.uav_altitude},
      {"service_radius", c.service_radius},
      {"carrier_wavelength", c.carrier_wavelength},
      {"rhs_spacing", c.rhs_spacing},
      {"bs_spacing", c.bs_spacing},
      {"element_spacing_ratio", c.element_spacing_ratio},
      {"path_gain_ref", c.path_gain_ref},
      {"path_loss_exp", c.path_loss_exp},
      {"rician_factor", c.rician_factor},
      {"noise_power", c.noise_power},
      {"jam_power", c.jam_power},
      {"bs_power_max", c.bs_power_max},
      {"echo_sinr_min", c.echo_sinr_min},
      {"v_max", c.v_max},
      {"a_max", c.a_max},
      {"circuit_power", c.circuit_power},
      {"aero.blade_power", c.aero.blade_power},
      {"aero.induced_power", c.aero.induced_power},
      {"aero.blade_angular_speed", c.aero.blade_angular_speed},
      {"aero.rotor_radius", c.aero.rotor_radius},
      {"aero.fuselage_drag_ratio", c.aero.fuselage_drag_ratio},
      {"aero.air_density", c.aero.air_density},
      {"aero.rotor_solidity", c.aero.rotor_solidity},
      {"aero.disc_area", c.aero.disc_area},
      {"aero.mean_induced_velocity", c.aero.mean_induced_velocity},
  };
  for (const auto& [name, v] : positives) need(v > 0 && std::isfinite(v), name, std::string(name) + " must be positive");
  need(c.rate_min >= 0, "rate_min", "rate_min must be non-negative");
  need(static_cast<int>(c.user_pos.size()) == c.num_users, "user_pos", "user_pos must list num_users positions");
  auto inside = [&](const Vec2& p) {
    return p.x() >= 0 && p.y() >= 0 && p.x() <= c.area_side && p.y() <= c.area_side;
  };
  need(inside(c.bs_pos), "bs_pos", "bs_pos must lie inside the deployment area");
  need(inside(c.jammer_pos), "jammer_pos", "jammer_pos must lie inside the deployment area");
  need(inside(c.target_pos), "target_pos", "target_pos must lie inside the deployment area");
  for (std::size_t k = 0; k < c.user_pos.size(); ++k)
    need(inside(c.user_pos[k]), "user_pos", "user " + std::to_string(k) + " must lie inside the deployment area");
  need(c.algo.max_outer >= 1, "algo.max_outer", "algo.max_outer must be at least 1");
  need(c.algo.phase_bits >= 1, "algo.phase_bits", "algo.phase_bits must be at least 1");
  {
    std::string o = c.algo.step_order;
    std::sort(o.begin(), o.end());
    need(o == "bpt", "algo.step_order", "algo.step_order must be a permutation of 'bpt'");
  }
  return r;
}

ScenarioConfig load_scenario(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool users_given = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SchemaError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no, line);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    int scale = 0;  // 1: dB -> linear, 2: dBm -> W
    std::string base = key;
    if (ends_with(base, "_dbm")) {
      base = base.substr(0, base.size() - 4);
      scale = 2;
    } else if (ends_with(base, "_db")) {
      base = base.substr(0, base.size() - 3);
      scale = 1;
    }
    if (auto it = aliases().find(base); it != aliases().end()) base = it->second;
    const Field* f = find_field(base);
    if (!f) throw SchemaError("line " + std::to_string(line_no) + ": unknown key '" + key + "'", line_no, key);
    if (scale != 0) {
      if (f->kind != Kind::Double)
        throw SchemaError("line " + std::to_string(line_no) + ": key '" + key + "' does not accept a dB suffix",
                          line_no, key);
      const double x = parse_double(value, line_no, key);
      *f->dbl(cfg) = scale == 1 ? db_to_linear(x) : dbm_to_watts(x);
    } else {
      f->set(cfg, value, line_no, key);
    }
    if (base == "user_pos") users_given = true;
  }
  if (cfg.randomize_users) {
    draw_users(cfg);
  } else if (!users_given) {
    throw SchemaError("randomize_users = false requires user_pos", 0, "user_pos");
  }
  const auto report = validate_scenario(cfg);
  if (!report.empty()) throw ValidationError(report.front().message, report.front().field);
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return load_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::string out;
  for (const auto& [name, f] : field_table()) {
    if (name == "randomize_users") continue;
    out += name + " = " + f.get(cfg) + "\n";
  }
  // written last so an explicit user list does not switch seeding off
  out += std::string("randomize_users = ") + (cfg.randomize_users ? "true" : "false") + "\n";
  return out;
}

ScenarioConfig with_seed(ScenarioConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  if (cfg.randomize_users) draw_users(cfg);
  return cfg;
}

ScenarioConfig apply_env_seed(ScenarioConfig cfg) {
  if (const char* s = std::getenv("RHOSI_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end == s || *end != '\0') throw SchemaError("RHOSI_SEED must be a non-negative integer", 0, "RHOSI_SEED");
    cfg = with_seed(std::move(cfg), v);
  }
  return cfg;
}

}  // namespace rhosi
