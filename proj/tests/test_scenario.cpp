#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "rhosi/scenario.hpp"

using namespace rhosi;

namespace {

bool has_field(const ValidationReport& rep, const std::string& field) {
  for (const auto& v : rep) {
    if (v.field == field) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("empty document loads the defaults") {
  const auto cfg = load_scenario("");
  CHECK(serialize_scenario(cfg) == serialize_scenario(default_scenario()));
}

TEST_CASE("single override keeps every other default") {
  const auto cfg = load_scenario("num_antennas = 8\n");
  CHECK(cfg.num_antennas == 8);
  auto expect = default_scenario();
  expect.num_antennas = 8;
  CHECK(serialize_scenario(cfg) == serialize_scenario(expect));
}

TEST_CASE("pa inefficiency below one is rejected") {
  try {
    load_scenario("eta = 0.9\n");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field == "pa_inefficiency");
    CHECK(std::string(e.what()) == "pa_inefficiency must exceed 1");
  }
}

TEST_CASE("malformed lines raise schema errors with the line") {
  try {
    load_scenario("num_users = 3\nthis line has no equals\n");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(load_scenario("no_such_key = 1\n"), SchemaError);
  CHECK_THROWS_AS(load_scenario("num_users = three\n"), SchemaError);
}

TEST_CASE("defaults reproduce the reference setup") {
  const auto cfg = default_scenario();
  CHECK(cfg.num_elements == 20);
  CHECK(cfg.v_max == 15.0);
  CHECK(cfg.noise_power == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(cfg.horizon_slots == 60);
  CHECK(cfg.slot_duration == 1.0);
  CHECK(cfg.total_time == 60.0);
  CHECK(cfg.num_antennas == 6);
  CHECK(cfg.num_users == 3);
  CHECK(cfg.uav_altitude == 40.0);
  CHECK(cfg.path_gain_ref == doctest::Approx(1e-2));
  CHECK(cfg.bs_power_max == doctest::Approx(10.0));
  CHECK(cfg.jam_power == doctest::Approx(1.0));
  CHECK(cfg.rate_min == 1.0);
  CHECK(cfg.a_max == 5.0);
  CHECK(linear_to_db(cfg.echo_sinr_min) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(static_cast<int>(cfg.user_pos.size()) == cfg.num_users);
}

TEST_CASE("default scenario validates cleanly") { CHECK(validate_scenario(default_scenario()).empty()); }

TEST_CASE("time grid mismatch is one violation") {
  auto cfg = default_scenario();
  cfg.total_time = 61.0;
  const auto rep = validate_scenario(cfg);
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].field == "total_time");
}

TEST_CASE("negative noise power is one violation") {
  auto cfg = default_scenario();
  cfg.noise_power = -1e-12;
  const auto rep = validate_scenario(cfg);
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].field == "noise_power");
}

TEST_CASE("entities outside the area and bad aero constants are reported") {
  auto cfg = default_scenario();
  cfg.jammer_pos = Vec2(500.0, 10.0);
  cfg.aero.rotor_radius = 0.0;
  const auto rep = validate_scenario(cfg);
  CHECK(rep.size() == 2);
  CHECK(has_field(rep, "jammer_pos"));
  CHECK(has_field(rep, "aero.rotor_radius"));
}

TEST_CASE("serialization round trip") {
  auto cfg = with_seed(default_scenario(), 11);
  cfg.num_antennas = 5;
  cfg.jam_power = 3.25;
  cfg.algo.step_order = "pbt";
  cfg.aero.air_density = 1.1;
  const auto back = load_scenario(serialize_scenario(cfg));
  CHECK(serialize_scenario(back) == serialize_scenario(cfg));
  CHECK(back.jam_power == cfg.jam_power);
  CHECK(back.algo.step_order == "pbt");
  CHECK(back.user_pos[2].x() == cfg.user_pos[2].x());
}

TEST_CASE("decibel keys are converted on load") {
  const auto cfg = load_scenario("jam_power_dbm = 40\necho_sinr_min_db = 0\n");
  CHECK(cfg.jam_power == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(cfg.echo_sinr_min == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("seeded users are deterministic and inside the area") {
  const auto a = with_seed(default_scenario(), 5);
  const auto b = with_seed(default_scenario(), 5);
  const auto c = with_seed(default_scenario(), 6);
  CHECK(serialize_scenario(a) == serialize_scenario(b));
  CHECK(serialize_scenario(a) != serialize_scenario(c));
  for (const auto& u : a.user_pos) {
    CHECK(u.x() >= 0.0);
    CHECK(u.x() <= a.area_side);
    CHECK(u.y() >= 0.0);
    CHECK(u.y() <= a.area_side);
  }
}

TEST_CASE("environment seed overrides the configured seed") {
  setenv("RHOSI_SEED", "42", 1);
  const auto cfg = apply_env_seed(default_scenario());
  unsetenv("RHOSI_SEED");
  CHECK(cfg.seed == 42);
  CHECK(serialize_scenario(cfg) == serialize_scenario(with_seed(default_scenario(), 42)));
}

TEST_CASE("rng uniform draws lie in the unit interval") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
