#include "qmf/trajectory.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qmf/parallel.hpp"

namespace qmf {

namespace {

constexpr std::size_t kTrajPerBlock = 64;

std::size_t steps_for(double t, double dt) {
  return static_cast<std::size_t>(std::llround(t / dt));
}

}  // namespace

void validate(const TrajectoryConfig& cfg, const QubitParams& q, const Rates& r,
              const MonitorConfig& mc) {
  std::ostringstream msg;
  if (!(cfg.dt > 0.0) || cfg.dt > 0.01 / q.delta) {
    msg << "TrajectoryConfig: dt = " << cfg.dt << " must be in (0, 0.01/delta]";
    throw std::invalid_argument(msg.str());
  }
  if (mc.gamma * cfg.dt > 0.01) {
    msg << "TrajectoryConfig: gamma*dt = " << mc.gamma * cfg.dt
        << " exceeds 0.01; first-order jump statistics invalid";
    throw std::invalid_argument(msg.str());
  }
  const double relax = r.relax();
  if (!(relax > 0.0))
    throw std::invalid_argument("TrajectoryConfig: bath rates must be positive");
  if (cfg.t_equilibrate < 10.0 / relax) {
    msg << "TrajectoryConfig: t_equilibrate = " << cfg.t_equilibrate
        << " below 10/gamma_+ = " << 10.0 / relax;
    throw std::invalid_argument(msg.str());
  }
  if (cfg.t_window < 50.0 / relax) {
    msg << "TrajectoryConfig: t_window = " << cfg.t_window
        << " below 50/gamma_+ = " << 50.0 / relax;
    throw std::invalid_argument(msg.str());
  }
}

std::vector<std::string> regime_warnings(const TrajectoryConfig& cfg,
                                         const QubitParams& q, const Rates& r,
                                         const MonitorConfig& mc,
                                         const Matrix2c& rho_ss) {
  (void)cfg;
  (void)q;
  std::vector<std::string> warnings;
  const double rho_mm = (density(mc.measure) * rho_ss).trace().real();
  const double tau_r = 2.0 / r.relax();
  if (mc.gamma * rho_mm > 0.0) {
    const double tau_0 = 1.0 / (mc.gamma * rho_mm);
    if (tau_0 < 10.0 * tau_r) {
      std::ostringstream msg;
      msg << "rare-jump regime violated: tau_0 = " << tau_0 << " < 10 tau_r = "
          << 10.0 * tau_r << "; noise approximations may be inaccurate";
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

double jump_probability(const Matrix2c& rho_c, const MonitorConfig& mc, double dt) {
  const double rho_mm = (density(mc.measure) * rho_c).trace().real();
  double p = mc.gamma * rho_mm * dt;
  if (p > 0.1)
    throw std::runtime_error(
        "jump_probability: p > 0.1, dt too coarse for the linearized jump process");
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

Matrix2c sme_step(const Matrix2c& rho_c, bool jumped, const QubitParams& q,
                  const Rates& r, const MonitorConfig& mc, double dt) {
  if (jumped) return density(mc.feedback);
  const Matrix2c h = hamiltonian(q);
  const Matrix2c pm = density(mc.measure);
  const double rho_mm = (pm * rho_c).trace().real();
  const Matrix2c no_detection = mc.gamma * (rho_mm * rho_c - 0.5 * (pm * rho_c + rho_c * pm));
  const Matrix2c drift =
      -kI * (h * rho_c - rho_c * h) + dissipator_bath(rho_c, r) + no_detection;
  const Matrix2c next = hermitized(rho_c + dt * drift);
  const double trace = next.trace().real();
  if (trace < 0.5)
    throw std::runtime_error("sme_step: trace collapsed below 0.5; step too large");
  return next / trace;
}

std::pair<double, double> step_energies(const Matrix2c& rho_c, bool jumped,
                                        const QubitParams& q,
                                        const MonitorConfig& mc, double dt) {
  const Matrix2c h = hamiltonian(q);
  const Matrix2c pm = density(mc.measure);
  const double rho_mm = (pm * rho_c).trace().real();
  const double e_state = (h * rho_c).trace().real();
  const double anticomm = 2.0 * (h * pm * rho_c).trace().real();
  const double q1 = dt * mc.gamma * (rho_mm * e_state - 0.5 * anticomm);
  double q2 = 0.0;
  if (jumped) q2 = (h * density(mc.feedback)).trace().real() - e_state;
  return {q1, q2};
}

SmeEngine::SmeEngine(const QubitParams& q, const Rates& r, const MonitorConfig& mc,
                     double dt)
    : gamma_(mc.gamma), dt_(dt), gamma_dt_(mc.gamma * dt) {
  const Matrix2c h = hamiltonian(q);
  const Matrix2c pm = density(mc.measure);
  const Matrix2c pn = density(mc.feedback);

  // Hermitian basis spanning the real representation.
  Matrix2c basis[4];
  basis[0] = (Matrix2c() << 1, 0, 0, 0).finished();
  basis[1] = (Matrix2c() << 0, 0, 0, 1).finished();
  basis[2] = (Matrix2c() << 0, 1, 1, 0).finished();
  basis[3] = (Matrix2c() << 0, kI, -kI, 0).finished();

  for (int k = 0; k < 4; ++k) {
    const Matrix2c& b = basis[k];
    const Matrix2c image = -kI * (h * b - b * h) + dissipator_bath(b, r) -
                           0.5 * gamma_ * (pm * b + b * pm);
    drift_.col(k) = to_real(image);
    meas_proj_(k) = (pm * b).trace().real();
    energy_(k) = (h * b).trace().real();
    energy_anticomm_(k) = 2.0 * (h * pm * b).trace().real();
  }
  feedback_vec_ = to_real(pn);
  energy_feedback_ = (h * pn).trace().real();
}

Vector4d SmeEngine::to_real(const Matrix2c& rho) {
  return Vector4d(rho(0, 0).real(), rho(1, 1).real(), rho(0, 1).real(),
                  rho(0, 1).imag());
}

Matrix2c SmeEngine::to_matrix(const Vector4d& v) {
  Matrix2c rho;
  rho(0, 0) = v[0];
  rho(1, 1) = v[1];
  rho(0, 1) = Complex(v[2], v[3]);
  rho(1, 0) = Complex(v[2], -v[3]);
  return rho;
}

std::vector<StepRecord> run_trajectory(const TrajectoryConfig& cfg,
                                       const QubitParams& q, const Rates& r,
                                       const MonitorConfig& mc,
                                       std::uint64_t traj_index) {
  validate(cfg, q, r, mc);
  const SmeEngine engine(q, r, mc, cfg.dt);
  const Matrix2c rho_ss = steady_state(build_liouvillian(q, r, mc));
  const std::size_t n_eq = steps_for(cfg.t_equilibrate, cfg.dt);
  const std::size_t n_rec = steps_for(cfg.t_window, cfg.dt);

  std::vector<StepRecord> records(n_rec);
  engine.run(cfg.master_seed, traj_index, SmeEngine::to_real(rho_ss), n_eq, n_rec,
             [&](std::size_t k, const StepRecord& rec, const Vector4d&) {
               records[k] = rec;
             });
  return records;
}

MeanPath ensemble_mean_state(const TrajectoryConfig& cfg, const QubitParams& q,
                             const Rates& r, const MonitorConfig& mc,
                             const Matrix2c& rho0,
                             const std::vector<double>& checkpoint_times,
                             unsigned n_threads) {
  if (cfg.n_traj < 100)
    throw std::invalid_argument("ensemble_mean_state: n_traj must be >= 100");
  const SmeEngine engine(q, r, mc, cfg.dt);
  const Vector4d v0 = SmeEngine::to_real(rho0);

  // Checkpoint k at time t means the state after round(t/dt) steps.
  std::vector<std::size_t> target_steps;
  for (double t : checkpoint_times) {
    if (t < 0.0) throw std::invalid_argument("ensemble_mean_state: negative time");
    target_steps.push_back(steps_for(t, cfg.dt));
    if (target_steps.size() > 1 && target_steps.back() < target_steps[target_steps.size() - 2])
      throw std::invalid_argument("ensemble_mean_state: checkpoint times must be nondecreasing");
  }
  const std::size_t n_checkpoints = target_steps.size();

  struct BlockSums {
    std::vector<Vector4d> sum;
    std::vector<Vector4d> sum_sq;
  };
  const std::size_t n_blocks = (cfg.n_traj + kTrajPerBlock - 1) / kTrajPerBlock;
  std::vector<BlockSums> blocks(n_blocks);

  parallel_blocks(n_blocks, n_threads, [&](std::size_t block) {
    BlockSums sums;
    sums.sum.assign(n_checkpoints, Vector4d::Zero());
    sums.sum_sq.assign(n_checkpoints, Vector4d::Zero());
    const std::uint64_t begin = block * kTrajPerBlock;
    const std::uint64_t end =
        std::min<std::uint64_t>(begin + kTrajPerBlock, cfg.n_traj);
    for (std::uint64_t traj = begin; traj < end; ++traj) {
      Vector4d v = v0;
      std::uint64_t step = 0;
      for (std::size_t c = 0; c < n_checkpoints; ++c) {
        while (step < target_steps[c]) {
          engine.advance(cfg.master_seed, traj, step, v);
          ++step;
        }
        sums.sum[c] += v;
        sums.sum_sq[c] += v.cwiseProduct(v);
      }
    }
    blocks[block] = std::move(sums);
  });

  // Fixed-order reduction over blocks.
  std::vector<Vector4d> total(n_checkpoints, Vector4d::Zero());
  std::vector<Vector4d> total_sq(n_checkpoints, Vector4d::Zero());
  for (const BlockSums& b : blocks)
    for (std::size_t c = 0; c < n_checkpoints; ++c) {
      total[c] += b.sum[c];
      total_sq[c] += b.sum_sq[c];
    }

  MeanPath path;
  path.n_traj = cfg.n_traj;
  const double n = static_cast<double>(cfg.n_traj);
  for (std::size_t c = 0; c < n_checkpoints; ++c) {
    const Vector4d mean = total[c] / n;
    const Vector4d var =
        (total_sq[c] / n - mean.cwiseProduct(mean)).cwiseMax(0.0);
    path.times.push_back(static_cast<double>(target_steps[c]) * cfg.dt);
    path.mean.push_back(SmeEngine::to_matrix(mean));
    path.stderr_components.push_back((var / n).cwiseSqrt());
  }
  return path;
}

}  // namespace qmf
