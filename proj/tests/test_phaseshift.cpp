#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rhosi/beamform.hpp"
#include "rhosi/metrics.hpp"
#include "rhosi/phaseshift.hpp"

using namespace rhosi;

namespace {

ScenarioConfig sized(int Nt, int K, int M, std::uint64_t seed) {
  auto cfg = default_scenario();
  cfg.num_antennas = Nt;
  cfg.num_users = K;
  cfg.num_elements = M;
  cfg.horizon_slots = 1;
  cfg.total_time = 1.0;
  return with_seed(cfg, seed);
}

CVec random_theta(std::mt19937_64& g, int M) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  CVec t(M);
  for (int m = 0; m < M; ++m) t(m) = std::polar(1.0, u(g));
  return t;
}

Beams random_beams(std::mt19937_64& g, int K, int Nt, double scale) {
  std::normal_distribution<double> d;
  Beams w;
  for (int k = 0; k < K; ++k) {
    CVec v(Nt);
    for (int i = 0; i < Nt; ++i) v(i) = scale * cd(d(g), d(g));
    w.push_back(v);
  }
  return w;
}

// Convex combination of rank-one augmented lifts: Hermitian, PSD, unit diagonal.
CMat random_lift(std::mt19937_64& g, int M) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int r = 1 + static_cast<int>(u(g) * 3.0);
  CMat out = CMat::Zero(M + 1, M + 1);
  double total = 0.0;
  std::vector<double> w;
  for (int i = 0; i < r; ++i) {
    w.push_back(u(g) + 1e-3);
    total += w.back();
  }
  for (int i = 0; i < r; ++i) out += (w[i] / total) * augmented_lift(random_theta(g, M));
  return out;
}

int count_prefix(const conic::Problem& p, const std::string& prefix) {
  int n = 0;
  for (const auto& c : p.constraints()) {
    if (c.label.rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("single element lift is the conjugate user entry times the channel row") {
  const auto cfg = sized(3, 2, 1, 4);
  const auto ch = assemble_channels(cfg, Vec2(10.0, 5.0), 0);
  std::mt19937_64 g(1);
  const auto L = lift_channels(ch, random_beams(g, 2, 3, 0.1), cfg);
  for (int k = 0; k < 2; ++k) {
    REQUIRE(L.G_bs[k].rows() == 1);
    for (int t = 0; t < 3; ++t) CHECK(std::abs(L.G_bs[k](0, t) - std::conj(ch.rhs_user[k](0)) * ch.bs_rhs(0, t)) < 1e-18);
  }
}

TEST_CASE("lifted coefficients reproduce the unlifted channels") {
  const auto cfg = sized(4, 3, 6, 2);
  const auto ch = assemble_channels(cfg, Vec2(-40.0, 70.0), 0);
  std::mt19937_64 g(3);
  const Beams w = random_beams(g, 3, 4, 0.2);
  const auto L = lift_channels(ch, w, cfg);
  const CVec theta = random_theta(g, 6);
  const auto pc = phases_from_theta(theta);
  const CMat Psi = augmented_lift(theta);
  for (int k = 0; k < 3; ++k) {
    const cd cascade = (theta.transpose() * L.G_bs[k] * w[k])(0);
    const cd composite = (composite_bs(ch, theta, k) * w[k])(0);
    const cd direct = (ch.bs_user[k].adjoint() * w[k])(0);
    CHECK(std::abs(cascade - (composite - direct)) <= 1e-12 * std::abs(composite));
    Eigen::SelfAdjointEigenSolver<CMat> es(L.xi_jam[k]);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * std::max(1e-300, es.eigenvalues().maxCoeff()));
    CHECK(L.varpi[k] == doctest::Approx(cfg.jam_power * std::norm(ch.jam_user[k]) + cfg.noise_power));
  }
  CHECK(lifted_sum_rate(Psi, L) == doctest::Approx(sum_rate(comm_sinrs(ch, pc, w, cfg))).epsilon(1e-10));
}

TEST_CASE("dc bound equals B at the anchor and underestimates it everywhere") {
  const auto cfg = sized(3, 3, 4, 6);
  const auto ch = assemble_channels(cfg, Vec2(25.0, 25.0), 0);
  std::mt19937_64 g(7);
  // Strong beams so that the cascade visibly moves the interference terms.
  const auto L = lift_channels(ch, random_beams(g, 3, 3, 30.0), cfg);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const CMat A = random_lift(g, 4);
    const CMat P = random_lift(g, 4);
    if (i < 50) CHECK(dc_bound_B(A, A, L) == doctest::Approx(dc_B(A, L)).epsilon(1e-14));
    if (dc_bound_B(P, A, L) > dc_B(P, L) + 1e-9) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("dc bound matches a hand expansion for one element and one user") {
  auto cfg = sized(2, 2, 1, 9);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 30.0), 0);
  std::mt19937_64 g(5);
  const Beams w = random_beams(g, 2, 2, 1.0);
  const auto L = lift_channels(ch, w, cfg);
  // psi = [conj(theta); 1] with theta = 1 for the anchor, and theta = e^{j a} for the point.
  const CMat A = augmented_lift(CVec::Ones(1));
  const CMat P = augmented_lift(CVec::Constant(1, std::polar(1.0, 0.9)));
  double expect = 0.0;
  for (int k = 0; k < 2; ++k) {
    auto power = [&](cd theta, const CVec& beam) {
      const cd amp = theta * (std::conj(ch.rhs_user[k](0)) * (ch.bs_rhs.row(0) * beam)(0)) +
                     (ch.bs_user[k].adjoint() * beam)(0);
      return std::norm(amp);
    };
    auto jam = [&](cd theta) { return std::norm(ch.jam_user[k] + theta * std::conj(ch.rhs_user[k](0)) * ch.jam_rhs(0)); };
    auto interf = [&](cd theta) { return cfg.noise_power + cfg.jam_power * jam(theta) + power(theta, w[1 - k]); };
    const double i0 = interf(1.0), i1 = interf(std::polar(1.0, 0.9));
    expect += -std::log2(i0) - (i1 - i0) / (i0 * std::numbers::ln2);
  }
  CHECK(dc_bound_B(P, A, L) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("phase subproblem structure for two elements") {
  const auto cfg = sized(2, 1, 2, 3);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  std::mt19937_64 g(2);
  const auto L = lift_channels(ch, random_beams(g, 1, 2, 0.5), cfg);
  const auto pp = build_phase_subproblem(L, augmented_lift(CVec::Ones(2)), 1.0, cfg);
  CHECK(pp.problem.num_blocks() == 1);
  CHECK(pp.problem.block_dim(0) == 6);  // augmented 3 x 3 Hermitian, real embedded
  CHECK(count_prefix(pp.problem, "diag") == 3);
  CHECK(count_prefix(pp.problem, "echo") == 1);
  CHECK(count_prefix(pp.problem, "sum-rate") == 1);
  CHECK_THROWS_AS(build_phase_subproblem(L, augmented_lift(CVec::Ones(2)), 0.0, cfg), ArgumentError);
}

TEST_CASE("spectral penalty vanishes at a rank-one anchor and matches a norm oracle") {
  std::mt19937_64 g(11);
  const CMat A1 = augmented_lift(random_theta(g, 3));
  CHECK(std::abs(spectral_penalty(A1, A1, 7.0)) <= 1e-10);

  const CMat A = random_lift(g, 3);
  const CMat P = random_lift(g, 3);
  const double kappa = 3.0;
  Eigen::SelfAdjointEigenSolver<CMat> ea(A);
  const CVec u = ea.eigenvectors().col(3);
  const double lin = ea.eigenvalues()(3) + std::real((u.adjoint() * (P - A) * u)(0, 0));
  Eigen::JacobiSVD<CMat> svd(P);
  const double nuclear = svd.singularValues().sum();
  CHECK(spectral_penalty(P, A, kappa) == doctest::Approx(kappa * (nuclear - lin)).epsilon(1e-10));

  // The built penalty expression agrees with the direct evaluation.
  const auto cfg = sized(2, 1, 3, 4);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  const auto L = lift_channels(ch, random_beams(g, 1, 2, 0.5), cfg);
  auto opt = phase_options(cfg);
  opt.enforce_rate = false;
  opt.enforce_echo = false;
  auto pp = build_phase_subproblem(L, A, kappa, cfg, opt);
  const auto s = conic::solve_conic(pp.problem);
  REQUIRE(s.ok());
  const CMat Psol = conic::herm_value(pp.Psi, s.block(pp.Psi.block));
  CHECK(s.eval(pp.penalty) == doctest::Approx(spectral_penalty(Psol, A, kappa)).epsilon(1e-6));
}

TEST_CASE("nuclear minus spectral gap is zero exactly for rank one") {
  std::mt19937_64 g(12);
  auto gap = [](const CMat& X) {
    Eigen::JacobiSVD<CMat> svd(X);
    const auto s = svd.singularValues();
    return (s.sum() - s(0)) / s(0);
  };
  const CMat r1 = augmented_lift(random_theta(g, 4));
  CHECK(gap(r1) <= 1e-12);
  const CMat r2 = 0.5 * augmented_lift(random_theta(g, 4)) + 0.5 * augmented_lift(random_theta(g, 4));
  CHECK(gap(r2) > 1e-3);
}

TEST_CASE("single element phases are trivial") {
  const auto cfg = sized(2, 1, 1, 2);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  std::mt19937_64 g(1);
  const auto res = solve_phase_penalty(ch, random_beams(g, 1, 2, 1.0), cfg, phase_options(cfg));
  REQUIRE(res.phases.theta.size() == 1);
  CHECK(std::abs(res.phases.theta(0) - cd(1.0, 0.0)) < 1e-15);
  CHECK(res.phases.rank_residual == 0.0);
}

TEST_CASE("penalty drives an unconstrained two element lift to rank one") {
  const auto cfg = sized(2, 1, 2, 5);
  const auto ch = assemble_channels(cfg, Vec2(10.0, 0.0), 0);
  std::mt19937_64 g(3);
  auto opt = phase_options(cfg);
  opt.enforce_rate = false;
  opt.enforce_echo = false;
  const auto res = solve_phase_penalty(ch, random_beams(g, 1, 2, 1.0), cfg, opt);
  CHECK(res.phases.rank_residual <= 1e-3);
  for (int m = 0; m < 2; ++m) CHECK(std::abs(std::abs(res.phases.theta(m)) - 1.0) <= 1e-9);
  CHECK(std::abs(res.phases.omega(0, 0) - 1.0) <= 1e-12);
}

TEST_CASE("three element phases against the exhaustive 3-bit grid") {
  // Without the direct path and jamming the cascade alone carries the link.
  auto cfg = sized(2, 1, 3, 4);
  cfg.jam_power = 0.0;
  cfg.rate_min = 0.5;
  auto ch = assemble_channels(cfg, Vec2(40.0, 60.0), 0);
  ch.bs_user[0].setZero();
  auto opt = phase_options(cfg);
  opt.enforce_echo = false;
  // The default reward on the rate slack is tiny, so the step stays near its
  // anchor; a unit reward turns the step into rate maximization.
  opt.slack_weight = 1.0;
  const Beams w = {ch.bs_rhs.row(0).adjoint().normalized() * std::sqrt(cfg.bs_power_max)};

  double grid_best = 0.0;
  const int levels = 8;
  for (int a = 0; a < levels; ++a) {
    for (int b = 0; b < levels; ++b) {
      for (int c = 0; c < levels; ++c) {
        CVec theta(3);
        theta << std::polar(1.0, 2 * kPi * a / levels), std::polar(1.0, 2 * kPi * b / levels),
            std::polar(1.0, 2 * kPi * c / levels);
        grid_best = std::max(grid_best, sum_rate(comm_sinrs(ch, phases_from_theta(theta), w, cfg)));
      }
    }
  }
  std::mt19937_64 g(9);
  const auto start = phases_from_theta(random_theta(g, 3));
  REQUIRE(sum_rate(comm_sinrs(ch, start, w, cfg)) >= cfg.rate_min);
  const auto res = solve_phase_penalty(ch, w, cfg, opt, &start);
  const double got = sum_rate(comm_sinrs(ch, res.phases, w, cfg));
  MESSAGE("grid best " << grid_best << " penalty " << got);
  CHECK(got >= 0.95 * grid_best);

  // With the default reward the step keeps feasibility and does not lose rate.
  const auto tiny = solve_phase_penalty(ch, w, cfg, [&] {
    auto o = opt;
    o.slack_weight = phase_options(cfg).slack_weight;
    return o;
  }(), &start);
  CHECK(sum_rate(comm_sinrs(ch, tiny.phases, w, cfg)) >= sum_rate(comm_sinrs(ch, start, w, cfg)) - 1e-6);
}

TEST_CASE("penalty loop keeps unit modulus and feasibility on the default slot") {
  const auto cfg = sized(6, 3, 20, 1);
  const auto ch = assemble_channels(cfg, Vec2(0.0, 0.0), 0);
  const auto start = matched_phases(ch, 0);
  Beams w;
  REQUIRE(initial_beams(ch, start, cfg, w));
  auto opt = phase_options(cfg);
  opt.inner_max = 4;
  const auto res = solve_phase_penalty(ch, w, cfg, opt, &start);
  for (int m = 0; m < 20; ++m) CHECK(std::abs(std::abs(res.phases.theta(m)) - 1.0) <= 1e-9);
  CHECK(sum_rate(comm_sinrs(ch, res.phases, w, cfg)) >= cfg.rate_min - 1e-6);
  CHECK(echo_sinr(ch, res.phases, w, cfg) >= cfg.echo_sinr_min * (1.0 - 1e-6));
  CHECK(res.projection_delta >= 0.0);
  for (size_t i = 1; i < res.trace.size(); ++i) {
    if (res.trace[i].kappa == res.trace[i - 1].kappa) {
      CHECK(res.trace[i].objective <= res.trace[i - 1].objective + 1e-7 * std::max(1.0, std::abs(res.trace[i - 1].objective)));
    }
  }
}

TEST_CASE("quantization examples") {
  const auto one = quantize_phases(phases_from_theta(CVec::Constant(1, std::polar(1.0, 0.6 * kPi))), 1);
  CHECK(std::abs(one.theta(0) - cd(-1.0, 0.0)) < 1e-12);

  CVec on_grid(8);
  for (int m = 0; m < 8; ++m) on_grid(m) = std::polar(1.0, 2 * kPi * m / 8);
  const auto same = quantize_phases(phases_from_theta(on_grid), 3);
  for (int m = 0; m < 8; ++m) CHECK(std::abs(same.theta(m) - on_grid(m)) < 1e-12);

  std::mt19937_64 g(4);
  const CVec th = random_theta(g, 500);
  const auto q = quantize_phases(phases_from_theta(th), 3);
  double worst = 0.0;
  for (int m = 0; m < 500; ++m) worst = std::max(worst, std::abs(std::arg(q.theta(m) / th(m))));
  CHECK(worst <= kPi / 8 + 1e-12);

  // A tie goes to the smaller angle.
  const auto tie = quantize_phases(phases_from_theta(CVec::Constant(1, cd(0.0, 1.0))), 1);
  CHECK(std::abs(tie.theta(0) - cd(1.0, 0.0)) < 1e-12);
  CHECK_THROWS_AS(quantize_phases(phases_from_theta(th), 0), ArgumentError);
}

TEST_CASE("theta is recovered from its augmented lift") {
  std::mt19937_64 g(6);
  const CVec th = random_theta(g, 7);
  const CVec back = theta_from_lift(augmented_lift(th));
  for (int m = 0; m < 7; ++m) CHECK(std::abs(back(m) - th(m)) < 1e-9);
}
