#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "qmf/cli.hpp"
#include "qmf/csv.hpp"
#include "qmf/energetics.hpp"
#include "qmf/noise.hpp"
#include "qmf/parallel.hpp"

namespace qmf::cli {

namespace {

struct Check {
  std::string name;
  double value = 0.0;      // measured worst case
  double threshold = 0.0;  // pass iff value <= threshold
  bool passed = false;
};

class Suite {
 public:
  explicit Suite(std::uint64_t seed) : rng_(seed), seed_(seed) {}

  void report(const std::string& name, double value, double threshold) {
    checks_.push_back({name, value, threshold, value <= threshold});
  }

  void report_flag(const std::string& name, bool ok) {
    checks_.push_back({name, ok ? 0.0 : 1.0, 0.0, ok});
  }

  BlochState random_state() {
    std::uniform_real_distribution<double> theta(0.0, kPi);
    std::uniform_real_distribution<double> phi(0.0, 2.0 * kPi);
    return BlochState(theta(rng_), phi(rng_));
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }

  Matrix2c random_density() {
    // Random Bloch vector inside the unit ball.
    const BlochState dir = random_state();
    const double r = std::cbrt(uniform(0.0, 1.0));
    const Matrix2c pure = density(dir);
    return r * pure + (1.0 - r) * 0.5 * Matrix2c::Identity();
  }

  std::mt19937_64& rng() { return rng_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Check>& checks() const { return checks_; }

 private:
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  std::vector<Check> checks_;
};

const QubitParams kQubit{};
const Rates kFig2{0.1, 0.05};
constexpr double kFig2Gamma = 0.1;
const Rates kFig4{0.3, 0.15};
constexpr double kFig4Gamma = 0.01;

void check_qubit_core(Suite& s) {
  double worst_projector = 0.0;
  double worst_unitarity = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const BlochState a = s.random_state();
    const Matrix2c rho = density(a);
    worst_projector = std::max(worst_projector,
                               std::abs(rho.trace().real() - 1.0));
    worst_projector =
        std::max(worst_projector, (rho * rho - rho).cwiseAbs().maxCoeff());
    const Matrix2c u = feedback_unitary(a, s.random_state());
    worst_unitarity = std::max(
        worst_unitarity,
        (u * u.adjoint() - Matrix2c::Identity()).cwiseAbs().maxCoeff());
  }
  s.report("density-projector", worst_projector, 1e-12);
  s.report("feedback-unitarity", worst_unitarity, 1e-12);

  double worst_add = 0.0;
  double worst_roundtrip = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Bath b1{s.uniform(0.3, 3.0), s.uniform(0.002, 0.05)};
    const Bath b2{s.uniform(0.3, 3.0), s.uniform(0.002, 0.05)};
    const BathSpec split{{b1, b2}, 1000.0};
    const Rates sum = rates_from_baths(split, kQubit);
    const Rates r1 = bath_rates(b1, split.cutoff, kQubit);
    const Rates r2 = bath_rates(b2, split.cutoff, kQubit);
    worst_add = std::max(worst_add,
                         std::abs(sum.emission - r1.emission - r2.emission) +
                             std::abs(sum.absorption - r1.absorption - r2.absorption));

    const BathSpec single{{b1}, 1000.0};
    const EffectiveBath eff =
        effective_bath(rates_from_baths(single, kQubit), kQubit, single.cutoff);
    worst_roundtrip =
        std::max(worst_roundtrip,
                 std::abs(eff.temperature - b1.temperature) / b1.temperature +
                     std::abs(eff.coupling - b1.coupling) / b1.coupling);
  }
  s.report("rates-additivity", worst_add, 1e-14);
  s.report("effective-bath-roundtrip", worst_roundtrip, 1e-10);
}

void check_lindblad(Suite& s) {
  const MonitorConfig mc(kFig2Gamma, s.random_state(), s.random_state());
  const Liouvillian liouvillian = build_liouvillian(kQubit, kFig2, mc);

  double worst_trace = 0.0;
  double worst_action = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Matrix2c rho = s.random_density();
    const Vector4c lv = liouvillian * vectorize(rho);
    worst_trace = std::max(worst_trace, std::abs((lv(0) + lv(3)).real()) +
                                            std::abs((lv(0) + lv(3)).imag()));
    const Matrix2c direct = -kI * (hamiltonian(kQubit) * rho - rho * hamiltonian(kQubit)) +
                            dissipator_bath(rho, kFig2) + dissipator_meas(rho, mc);
    worst_action =
        std::max(worst_action, (unvectorize(lv) - direct).cwiseAbs().maxCoeff());
  }
  s.report("liouvillian-trace-preservation", worst_trace, 1e-14);
  s.report("liouvillian-action-consistency", worst_action, 1e-12);

  const Matrix2c rho_ss = steady_state(liouvillian);
  s.report("steady-state-residual", (liouvillian * vectorize(rho_ss)).norm(), 1e-12);

  // Detailed balance at gamma = 0.
  const MonitorConfig off(0.0, BlochState(0.0, 0.0), BlochState(0.0, 0.0));
  const Matrix2c balance = steady_state(build_liouvillian(kQubit, kFig2, off));
  s.report("detailed-balance-sz",
           std::abs(sigma_z_expectation(balance) + kFig2.net() / kFig2.relax()),
           1e-12);

  // Trace drift, Hermiticity, positivity along a deterministic path.
  const auto path = evolve(excited_ket() * excited_ket().adjoint(), liouvillian,
                           40.0, 0.01, kQubit);
  double drift = 0.0, herm = 0.0, min_eig = 1.0;
  for (const TimedState& ts : path) {
    drift = std::max(drift, std::abs(ts.rho.trace().real() - 1.0));
    herm = std::max(herm, (ts.rho - ts.rho.adjoint()).cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(ts.rho);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  s.report("evolve-trace-drift", drift, 1e-9);
  s.report("evolve-hermiticity", herm, 1e-14);
  s.report("evolve-positivity", std::max(0.0, -min_eig), 1e-9);
}

void check_energetics(Suite& s) {
  double worst_first_law = 0.0;
  double worst_split = 0.0;
  double worst_balance = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Bath cold{s.uniform(0.3, 1.5), s.uniform(0.002, 0.05)};
    const Bath hot{s.uniform(1.5, 3.0), s.uniform(0.002, 0.05)};
    const BathSpec spec{{cold, hot}, 1000.0};
    const double gamma = s.uniform(0.01, 0.3);
    const MonitorConfig mc(gamma, s.random_state(), s.random_state());
    const Rates total = rates_from_baths(spec, kQubit);
    const Matrix2c rho = steady_state(build_liouvillian(kQubit, total, mc));
    const MonitorFlow flow = monitor_flow(rho, kQubit, mc);
    const double jc = bath_flow(rho, kQubit, bath_rates(cold, spec.cutoff, kQubit));
    const double jh = bath_flow(rho, kQubit, bath_rates(hot, spec.cutoff, kQubit));
    worst_first_law = std::max(
        worst_first_law, std::abs(flow.total + jc + jh) / (gamma * kQubit.delta));

    const double direct =
        (hamiltonian(kQubit) * dissipator_meas(rho, mc)).trace().real();
    worst_split = std::max(worst_split, std::abs(flow.total - direct));

    // balance residual is proportional to the flow itself.
    const double residual = balance_residual(rho, mc);
    worst_balance = std::max(
        worst_balance,
        std::abs(flow.total - 0.5 * gamma * kQubit.delta * residual));
  }
  s.report("first-law", worst_first_law, 1e-10);
  s.report("flow-split-consistency", worst_split, 1e-12);
  s.report("balance-condition", worst_balance, 1e-12);

  double worst_mirror = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double tm = s.uniform(0.0, kPi);
    const double tn = s.uniform(0.0, kPi);
    worst_mirror = std::max(
        worst_mirror,
        std::abs(analytic_flow(tm, tn, kFig2, kFig2Gamma, kQubit) -
                 analytic_flow(kPi - tn, kPi - tm, kFig2, kFig2Gamma, kQubit)));
  }
  s.report("mirror-symmetry", worst_mirror, 1e-12);

  const FlowBounds bounds = flow_bounds(kFig2, kFig2Gamma, kQubit);
  double outside = 0.0;
  double diag_min = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double tm = kPi * i / 100.0;
    const MonitorConfig diag(kFig2Gamma, BlochState(tm, 0.0), BlochState(tm, 0.0));
    diag_min = std::min(diag_min, steady_monitor_flow(kQubit, kFig2, diag).total);
    for (int j = 0; j <= 100; ++j) {
      const double tn = kPi * j / 100.0;
      const double flow = analytic_flow(tm, tn, kFig2, kFig2Gamma, kQubit);
      outside = std::max(outside, std::max(flow - bounds.max, bounds.min - flow));
    }
  }
  s.report("bounds-grid", outside, 1e-12);
  s.report("measurement-only-nonnegativity", std::max(0.0, -diag_min),
           1e-10 * kFig2Gamma * kQubit.delta);
}

void check_noise(Suite& s) {
  double worst_triangle = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double tm = s.uniform(0.05 * kPi, 0.95 * kPi);
    const MonitorConfig mc(kFig4Gamma, BlochState(tm, 0.0), BlochState(tm, 0.0));
    const NoiseClosedForm closed = noise_closed_form(kQubit, kFig4, mc);
    if (closed.q_jump == 0.0) continue;
    worst_triangle = std::max(
        worst_triangle,
        std::abs(fano_from_spectra(closed.s0, closed.s1) - closed.fano));
  }
  s.report("fano-consistency-triangle", worst_triangle, 1e-10);

  // sme_step agrees with the deterministic engine to O(dt^2) at gamma = 0.
  const MonitorConfig off(0.0, BlochState(0.3, 0.0), BlochState(0.3, 0.0));
  const Liouvillian liouvillian = build_liouvillian(kQubit, kFig2, off);
  const Matrix2c rho0 = density(BlochState(0.4 * kPi, 0.3));
  const double dt = 0.005;
  const Matrix2c sme = sme_step(rho0, false, kQubit, kFig2, off, dt);
  const Matrix2c reference = rk4_step(rho0, liouvillian, dt);
  s.report("sme-step-consistency", (sme - reference).cwiseAbs().maxCoeff(),
           10.0 * dt * dt);
}

void check_trajectories(Suite& s, unsigned threads) {
  // Jump statistics: at theta_m = theta_n = 0 with no baths the conditional
  // state is pinned at |g><g| = P_m, so jumps are Bernoulli(gamma dt).
  {
    const QubitParams q;
    const Rates none{0.0, 0.0};
    const MonitorConfig mc(0.5, BlochState(0.0, 0.0), BlochState(0.0, 0.0));
    const SmeEngine engine(q, none, mc, 0.01);
    Vector4d v = SmeEngine::to_real(density(mc.measure));
    const double p = 0.5 * 0.01;
    const std::size_t n = 200000;
    std::size_t jumps = 0;
    for (std::size_t k = 0; k < n; ++k)
      if (engine.advance(s.seed(), 0, k, v).jumped) ++jumps;
    const double expected = p * static_cast<double>(n);
    const double chi2 =
        (jumps - expected) * (jumps - expected) / expected +
        (jumps - expected) * (jumps - expected) / (static_cast<double>(n) - expected);
    s.report("jump-binomial-chi2", chi2, 6.635);  // 1 dof at significance 0.01
  }

  // Ensemble mean reproduces the deterministic path (5 sigma).
  {
    const MonitorConfig mc(kFig2Gamma, BlochState(0.3 * kPi, 0.0),
                           BlochState(0.7 * kPi, 0.0));
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_equilibrate = 10.0 / kFig2.relax();
    cfg.t_window = 50.0 / kFig2.relax();
    cfg.n_traj = 2000;
    cfg.master_seed = s.seed();
    const Matrix2c rho0 = density(BlochState(0.0, 0.0));
    const std::vector<double> times{2.0, 6.0, 12.0, 20.0, 30.0};
    const MeanPath mean =
        ensemble_mean_state(cfg, kQubit, kFig2, mc, rho0, times, threads);
    const Liouvillian liouvillian = build_liouvillian(kQubit, kFig2, mc);
    const auto path = evolve(rho0, liouvillian, 30.0, cfg.dt, kQubit);
    double worst = 0.0;
    for (std::size_t c = 0; c < times.size(); ++c) {
      const std::size_t idx = static_cast<std::size_t>(std::llround(times[c] / cfg.dt));
      const Vector4d diff = SmeEngine::to_real(mean.mean[c]) -
                            SmeEngine::to_real(path[idx].rho);
      for (int k = 0; k < 4; ++k) {
        const double se = std::max(mean.stderr_components[c][k], 1e-12);
        worst = std::max(worst, std::abs(diff[k]) / se);
      }
    }
    s.report("unraveling-mean-5sigma", worst, 5.0);
  }

  // Determinism: bitwise identical estimates across thread counts and reruns.
  {
    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.t_equilibrate = 10.0 / kFig4.relax();
    cfg.t_window = 50.0 / kFig4.relax();
    cfg.n_traj = 512;
    cfg.master_seed = s.seed() + 7;
    const MonitorConfig mc(kFig4Gamma, BlochState(0.35 * kPi, 0.0),
                           BlochState(0.35 * kPi, 0.0));
    const CorrelationSeries a =
        ensemble_correlation(cfg, kQubit, kFig4, mc, {}, 1);
    const CorrelationSeries b =
        ensemble_correlation(cfg, kQubit, kFig4, mc, {}, threads > 1 ? threads : 2);
    const bool identical = a.c0 == b.c0 && a.s0_mean == b.s0_mean &&
                           a.s1_mean == b.s1_mean && (a.c1 == b.c1).all();
    s.report_flag("ensemble-determinism", identical);
  }

  // Config validation rejects an oversized step.
  {
    TrajectoryConfig bad;
    bad.dt = 0.02;
    bad.t_equilibrate = 100.0;
    bad.t_window = 400.0;
    bad.n_traj = 1;
    bool rejected = false;
    try {
      validate(bad, kQubit, kFig2,
               MonitorConfig(kFig2Gamma, BlochState(0, 0), BlochState(0, 0)));
    } catch (const std::invalid_argument&) {
      rejected = true;
    }
    s.report_flag("validator-rejects-coarse-dt", rejected);
  }
}

}  // namespace

int run_validate(const Options& opts) {
  Suite suite(opts.seed.value_or(1));
  const unsigned threads = opts.threads > 0 ? opts.threads : default_thread_count();

  check_qubit_core(suite);
  check_lindblad(suite);
  check_energetics(suite);
  check_noise(suite);
  check_trajectories(suite, threads);

  bool all_passed = true;
  for (const Check& c : suite.checks()) {
    all_passed = all_passed && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (value "
              << format_double(c.value) << ", threshold "
              << format_double(c.threshold) << ")\n";
  }
  std::cout << (all_passed ? "validate: all checks passed\n"
                           : "validate: FAILURES present\n");

  if (opts.out && !opts.out->empty() && *opts.out != "-") {
    std::ofstream out(*opts.out, std::ios::binary);
    CsvWriter csv(out);
    csv.metadata("version", std::string_view(kVersion));
    csv.metadata("command", std::string_view("validate"));
    csv.metadata("seed", suite.seed());
    csv.header({"check", "passed", "value", "threshold"});
    for (const Check& c : suite.checks()) {
      out << c.name << "," << (c.passed ? 1 : 0) << ","
          << format_double(c.value) << "," << format_double(c.threshold) << "\n";
    }
  }
  return all_passed ? 0 : 1;
}

}  // namespace qmf::cli
