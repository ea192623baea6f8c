#include <cmath>
#include <random>

#include "doctest.h"
#include "qmf/energetics.hpp"
#include "qmf/trajectory.hpp"

using namespace qmf;

namespace {

const QubitParams kQubit{};
const Rates kFig2{0.1, 0.05};
const Rates kFig4{0.3, 0.15};

TrajectoryConfig fig4_config(std::uint64_t n_traj, std::uint64_t seed,
                             double dt = 0.01) {
  TrajectoryConfig cfg;
  cfg.dt = dt;
  cfg.t_equilibrate = 10.0 / kFig4.relax();
  cfg.t_window = 50.0 / kFig4.relax();
  cfg.n_traj = n_traj;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("jump probability basics") {
  const MonitorConfig mc(0.4, BlochState(0.9, 0.0), BlochState(2.0, 0.0));
  const double dt = 0.01;
  CHECK(jump_probability(density(mc.measure), mc, dt) ==
        doctest::Approx(0.4 * dt).epsilon(1e-12));
  const Matrix2c orthogonal =
      orthogonal_ket(mc.measure) * orthogonal_ket(mc.measure).adjoint();
  CHECK(jump_probability(orthogonal, mc, dt) == doctest::Approx(0.0));
  CHECK(jump_probability(0.5 * Matrix2c::Identity(), mc, dt) ==
        doctest::Approx(0.2 * dt).epsilon(1e-12));
  CHECK_THROWS_AS(jump_probability(density(mc.measure), mc, 0.5),
                  std::runtime_error);
}

TEST_CASE("sme step jumps to the feedback state") {
  const MonitorConfig mc(0.3, BlochState(0.4, 0.0), BlochState(2.2, 0.7));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> theta(0.0, kPi);
  for (int k = 0; k < 20; ++k) {
    const Matrix2c rho = density(BlochState(theta(rng), theta(rng)));
    const Matrix2c next = sme_step(rho, true, kQubit, kFig2, mc, 0.005);
    CHECK((next - density(mc.feedback)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("no-detection step reduces to the deterministic flow at gamma = 0") {
  const MonitorConfig off(0.0, BlochState(0.3, 0.0), BlochState(0.3, 0.0));
  const Liouvillian liouvillian = build_liouvillian(kQubit, kFig2, off);
  const Matrix2c rho = density(BlochState(0.4 * kPi, 0.3));
  double error_coarse = 0.0, error_fine = 0.0;
  for (double dt : {0.008, 0.004}) {
    const Matrix2c sme = sme_step(rho, false, kQubit, kFig2, off, dt);
    const Matrix2c reference = rk4_step(rho, liouvillian, dt);
    (dt == 0.008 ? error_coarse : error_fine) =
        (sme - reference).cwiseAbs().maxCoeff();
  }
  CHECK(error_coarse < 1e-4);
  const double order = std::log2(error_coarse / error_fine);
  CHECK(order > 1.7);  // first-order step against RK4: O(dt^2) difference
  CHECK(order < 2.3);
}

TEST_CASE("orthogonal pole state is invariant under the no-detection update") {
  const MonitorConfig mc(0.2, BlochState(0.0, 0.0), BlochState(0.0, 0.0));
  const Rates none{0.0, 0.0};
  const Matrix2c rho =
      orthogonal_ket(mc.measure) * orthogonal_ket(mc.measure).adjoint();
  const Matrix2c next = sme_step(rho, false, kQubit, none, mc, 0.005);
  CHECK((next - rho).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("step energies") {
  const double dt = 0.005;
  SUBCASE("jumping to the current state moves no energy") {
    const MonitorConfig mc(0.3, BlochState(0.4, 0.0), BlochState(1.1, 0.0));
    const auto [q1, q2] =
        step_energies(density(mc.feedback), true, kQubit, mc, dt);
    (void)q1;
    CHECK(std::abs(q2) < 1e-15);
  }
  SUBCASE("ground to excited jump transfers delta") {
    const MonitorConfig mc(0.3, BlochState(0.0, 0.0), BlochState(kPi, 0.0));
    const auto [q1, q2] =
        step_energies(density(BlochState(0.0, 0.0)), true, kQubit, mc, dt);
    (void)q1;
    CHECK(q2 == doctest::Approx(kQubit.delta).epsilon(1e-12));
  }
  SUBCASE("no jump leaves q2 = 0") {
    const MonitorConfig mc(0.3, BlochState(0.4, 0.0), BlochState(1.1, 0.0));
    const auto [q1, q2] =
        step_energies(0.5 * Matrix2c::Identity(), false, kQubit, mc, dt);
    (void)q1;
    CHECK(q2 == 0.0);
  }
}

TEST_CASE("engine agrees with the reference step and energies") {
  const MonitorConfig mc(0.05, BlochState(0.35 * kPi, 0.0),
                         BlochState(0.8 * kPi, 0.0));
  const double dt = 0.005;
  const SmeEngine engine(kQubit, kFig4, mc, dt);
  Matrix2c rho = steady_state(build_liouvillian(kQubit, kFig4, mc));
  Vector4d v = SmeEngine::to_real(rho);
  for (std::uint64_t step = 0; step < 2000; ++step) {
    const double p_ref = jump_probability(rho, mc, dt);
    const bool jumped = uniform01(99, 0, step) < p_ref;
    const auto [q1_ref, q2_ref] = step_energies(rho, jumped, kQubit, mc, dt);
    const StepRecord rec = engine.advance(99, 0, step, v);
    CHECK(rec.jumped == jumped);
    CHECK(rec.q1 == doctest::Approx(q1_ref).epsilon(1e-10));
    CHECK(rec.q2 == doctest::Approx(q2_ref).epsilon(1e-10));
    rho = sme_step(rho, jumped, kQubit, kFig4, mc, dt);
    CHECK((SmeEngine::to_matrix(v) - rho).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(is_density_matrix(SmeEngine::to_matrix(v), 1e-10, 1e-9));
  }
}

TEST_CASE("no monitor means no jumps and no energy records") {
  TrajectoryConfig cfg = fig4_config(1, 11);
  const MonitorConfig off(0.0, BlochState(0.3, 0.0), BlochState(0.9, 0.0));
  const auto records = run_trajectory(cfg, kQubit, kFig4, off, 0);
  for (const StepRecord& rec : records) {
    CHECK(!rec.jumped);
    CHECK(rec.q1 == 0.0);
    CHECK(rec.q2 == 0.0);
  }
}

TEST_CASE("trajectories are bit-identical for identical keys") {
  TrajectoryConfig cfg = fig4_config(1, 123);
  const MonitorConfig mc(0.01, BlochState(0.35 * kPi, 0.0),
                         BlochState(0.35 * kPi, 0.0));
  const auto a = run_trajectory(cfg, kQubit, kFig4, mc, 5);
  const auto b = run_trajectory(cfg, kQubit, kFig4, mc, 5);
  REQUIRE(a.size() == b.size());
  bool identical = true;
  for (std::size_t k = 0; k < a.size(); ++k)
    identical = identical && a[k].jumped == b[k].jumped && a[k].q1 == b[k].q1 &&
                a[k].q2 == b[k].q2;
  CHECK(identical);
}

TEST_CASE("jump rate and window flow match the steady-state solver") {
  const MonitorConfig mc(0.01, BlochState(0.3 * kPi, 0.0),
                         BlochState(0.7 * kPi, 0.0));
  TrajectoryConfig cfg = fig4_config(800, 2024);
  const Matrix2c rho_ss = steady_state(build_liouvillian(kQubit, kFig4, mc));
  const double rho_mm = (density(mc.measure) * rho_ss).trace().real();
  const double flow_exact = monitor_flow(rho_ss, kQubit, mc).total;

  double jumps = 0.0;
  double energy = 0.0;
  double energy_sq = 0.0;
  for (std::uint64_t traj = 0; traj < cfg.n_traj; ++traj) {
    const auto records = run_trajectory(cfg, kQubit, kFig4, mc, traj);
    double traj_energy = 0.0;
    for (const StepRecord& rec : records) {
      if (rec.jumped) jumps += 1.0;
      traj_energy += rec.q1 + rec.q2;
    }
    const double mean_flow = traj_energy / cfg.t_window;
    energy += mean_flow;
    energy_sq += mean_flow * mean_flow;
  }
  const double n = static_cast<double>(cfg.n_traj);

  // Jump counts are near-Poisson over the window.
  const double rate = jumps / (n * cfg.t_window);
  const double rate_err = std::sqrt(jumps) / (n * cfg.t_window);
  CHECK(std::abs(rate - mc.gamma * rho_mm) < 3.0 * rate_err);

  // Window-averaged conditional flow against the solver and the closed form.
  const double mean = energy / n;
  const double stderr_mean =
      std::sqrt(std::max(0.0, energy_sq / n - mean * mean) / n);
  CHECK(std::abs(mean - flow_exact) < 3.0 * stderr_mean);
  const double analytic = analytic_flow(mc.measure.theta, mc.feedback.theta,
                                        kFig4, mc.gamma, kQubit);
  CHECK(std::abs(mean - analytic) <
        3.0 * stderr_mean + 0.01 * std::abs(analytic));
}

TEST_CASE("jump statistics are binomial at a pinned state") {
  // theta_m = theta_n = 0 with no baths pins rho_c at P_m, so each step is an
  // independent Bernoulli(gamma dt) draw.
  const MonitorConfig mc(0.5, BlochState(0.0, 0.0), BlochState(0.0, 0.0));
  const Rates none{0.0, 0.0};
  const SmeEngine engine(kQubit, none, mc, 0.01);
  Vector4d v = SmeEngine::to_real(density(mc.measure));
  const std::size_t n = 100000;
  const double p = 0.5 * 0.01;
  std::size_t jumps = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (engine.advance(31337, 0, k, v).jumped) ++jumps;
  }
  const double expected = p * static_cast<double>(n);
  const double d = static_cast<double>(jumps) - expected;
  const double chi2 =
      d * d / expected + d * d / (static_cast<double>(n) - expected);
  CHECK(chi2 < 6.635);  // 1 dof, significance 0.01
}

TEST_CASE("ensemble mean follows the Lindblad path") {
  const MonitorConfig mc(0.1, BlochState(0.3 * kPi, 0.0),
                         BlochState(0.7 * kPi, 0.0));
  TrajectoryConfig cfg;
  cfg.dt = 0.01;
  cfg.t_equilibrate = 10.0 / kFig2.relax();
  cfg.t_window = 50.0 / kFig2.relax();
  cfg.n_traj = 2000;
  cfg.master_seed = 99;
  const Matrix2c rho0 = density(BlochState(0.0, 0.0));
  const std::vector<double> times{2.0, 5.0, 10.0, 20.0, 35.0};
  const MeanPath mean = ensemble_mean_state(cfg, kQubit, kFig2, mc, rho0, times, 2);

  const auto path =
      evolve(rho0, build_liouvillian(kQubit, kFig2, mc), 35.0, cfg.dt, kQubit);
  for (std::size_t c = 0; c < times.size(); ++c) {
    const std::size_t idx =
        static_cast<std::size_t>(std::llround(times[c] / cfg.dt));
    const Vector4d diff =
        SmeEngine::to_real(mean.mean[c]) - SmeEngine::to_real(path[idx].rho);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(diff[k]) <=
            5.0 * std::max(mean.stderr_components[c][k], 1e-12));
  }
}

TEST_CASE("gamma = 0 ensembles have zero variance") {
  const MonitorConfig off(0.0, BlochState(0.2, 0.0), BlochState(0.2, 0.0));
  TrajectoryConfig cfg;
  cfg.dt = 0.01;
  cfg.t_equilibrate = 10.0 / kFig2.relax();
  cfg.t_window = 50.0 / kFig2.relax();
  cfg.n_traj = 200;
  cfg.master_seed = 5;
  const Matrix2c rho0 = density(BlochState(kPi, 0.0));
  const MeanPath mean =
      ensemble_mean_state(cfg, kQubit, kFig2, off, rho0, {1.0, 5.0}, 2);
  // One-pass variance leaves rounding residue; identical trajectories bound
  // it at the square root of machine epsilon times the state scale.
  for (const Vector4d& se : mean.stderr_components)
    CHECK(se.maxCoeff() < 1e-7);

  // The members really are bit-identical.
  const SmeEngine engine(kQubit, kFig2, off, cfg.dt);
  Vector4d final_a = Vector4d::Zero();
  Vector4d final_b = Vector4d::Zero();
  engine.run(cfg.master_seed, 3, SmeEngine::to_real(rho0), 0, 500,
             [&](std::size_t, const StepRecord&, const Vector4d& v) { final_a = v; });
  engine.run(cfg.master_seed, 8, SmeEngine::to_real(rho0), 0, 500,
             [&](std::size_t, const StepRecord&, const Vector4d& v) { final_b = v; });
  CHECK(final_a == final_b);
}

TEST_CASE("steady-window mean sigma_z matches the solver") {
  const MonitorConfig mc(0.01, BlochState(0.4 * kPi, 0.0),
                         BlochState(0.4 * kPi, 0.0));
  TrajectoryConfig cfg = fig4_config(1000, 7);
  const Matrix2c rho_ss = steady_state(build_liouvillian(kQubit, kFig4, mc));
  // Start at the steady state; any late checkpoint samples the stationary
  // ensemble.
  const std::vector<double> times{cfg.t_window};
  const MeanPath mean =
      ensemble_mean_state(cfg, kQubit, kFig4, mc, rho_ss, times, 2);
  const double sz_mc = sigma_z_expectation(mean.mean[0]);
  const double se =
      mean.stderr_components[0][1] + mean.stderr_components[0][0];
  CHECK(std::abs(sz_mc - sigma_z_expectation(rho_ss)) <= 3.0 * se + 1e-12);
}

TEST_CASE("config validation") {
  const MonitorConfig mc(0.01, BlochState(0.3, 0.0), BlochState(0.3, 0.0));
  TrajectoryConfig cfg = fig4_config(1, 1);
  CHECK_NOTHROW(validate(cfg, kQubit, kFig4, mc));

  TrajectoryConfig coarse = cfg;
  coarse.dt = 0.02;
  CHECK_THROWS_AS(validate(coarse, kQubit, kFig4, mc), std::invalid_argument);

  TrajectoryConfig short_eq = cfg;
  short_eq.t_equilibrate = 1.0;
  CHECK_THROWS_AS(validate(short_eq, kQubit, kFig4, mc), std::invalid_argument);

  TrajectoryConfig short_window = cfg;
  short_window.t_window = 10.0;
  CHECK_THROWS_AS(validate(short_window, kQubit, kFig4, mc), std::invalid_argument);

  TrajectoryConfig hot = cfg;
  const MonitorConfig strong(2.0, BlochState(0.3, 0.0), BlochState(0.3, 0.0));
  CHECK_THROWS_AS(validate(hot, kQubit, kFig4, strong), std::invalid_argument);
}

TEST_CASE("regime validator warns only outside the rare-jump window") {
  TrajectoryConfig cfg = fig4_config(1, 1);
  const MonitorConfig rare(0.01, BlochState(0.4 * kPi, 0.0),
                           BlochState(0.4 * kPi, 0.0));
  const Matrix2c rho_rare = steady_state(build_liouvillian(kQubit, kFig4, rare));
  CHECK(regime_warnings(cfg, kQubit, kFig4, rare, rho_rare).empty());

  const MonitorConfig frequent(0.1, BlochState(0.4 * kPi, 0.0),
                               BlochState(0.4 * kPi, 0.0));
  TrajectoryConfig cfg2;
  cfg2.dt = 0.01;
  cfg2.t_equilibrate = 10.0 / kFig2.relax();
  cfg2.t_window = 50.0 / kFig2.relax();
  const Matrix2c rho_freq =
      steady_state(build_liouvillian(kQubit, kFig2, frequent));
  CHECK(!regime_warnings(cfg2, kQubit, kFig2, frequent, rho_freq).empty());
}
