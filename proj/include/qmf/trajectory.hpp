#pragma once

// Stochastic unraveling of the master equation: quantum-jump sampling,
// conditional-state propagation, and per-step energy bookkeeping.
//
// Per step of size dt, a detection fires with probability
// p = gamma <m|rho_c|m> dt.  On detection the conditional state jumps to the
// feedback projector exactly; otherwise it follows the no-detection drift
//   rho + (-i[H0,rho] + D_B[rho] + gamma rho_mm rho - (gamma/2){P_m,rho}) dt
// and is renormalized.  Randomness is counter-based on
// (master_seed, trajectory, step), so ensembles are reproducible and
// independent of scheduling.

#include <cstdint>
#include <string>
#include <vector>

#include "qmf/lindblad.hpp"
#include "qmf/qubit.hpp"
#include "qmf/rng.hpp"
#include "qmf/types.hpp"

namespace qmf {

struct TrajectoryConfig {
  double dt = 0.005;           // step; <= 0.01/delta
  double t_equilibrate = 0.0;  // >= 10/gamma_+
  double t_window = 0.0;       // record window; >= 50/gamma_+
  std::uint64_t n_traj = 0;
  std::uint64_t master_seed = 0;
};

// Hard invariants; throws std::invalid_argument on violation.
void validate(const TrajectoryConfig& cfg, const QubitParams& q, const Rates& r,
              const MonitorConfig& mc);

// Soft checks for the rare-jump regime the noise approximations assume:
// tau_0 = 1/(gamma rho_mm) >= 10 tau_r with tau_r = 2/gamma_+.
std::vector<std::string> regime_warnings(const TrajectoryConfig& cfg,
                                         const QubitParams& q, const Rates& r,
                                         const MonitorConfig& mc,
                                         const Matrix2c& rho_ss);

struct StepRecord {
  bool jumped = false;
  double q1 = 0.0;  // no-detection energy increment, tr[H0 D_M^(1)[rho_c]] dt
  double q2 = 0.0;  // jump energy, tr[H0 (P_n - rho_c)]; zero unless jumped
};

// p = gamma <m|rho_c|m> dt clamped to [0, 1]; throws if p > 0.1 (dt too
// coarse for the linearized jump process).
double jump_probability(const Matrix2c& rho_c, const MonitorConfig& mc, double dt);

// One conditional update (reference implementation; the ensemble runner uses
// the compiled SmeEngine below).  Hermiticity is preserved exactly; throws
// if the pre-normalization trace falls below 0.5.
Matrix2c sme_step(const Matrix2c& rho_c, bool jumped, const QubitParams& q,
                  const Rates& r, const MonitorConfig& mc, double dt);

// (q1, q2) for the state *before* the step.
std::pair<double, double> step_energies(const Matrix2c& rho_c, bool jumped,
                                        const QubitParams& q,
                                        const MonitorConfig& mc, double dt);

// Conditional states stay Hermitian with unit trace by construction in the
// real representation v = (rho_gg, rho_ee, Re rho_ge, Im rho_ge).
class SmeEngine {
 public:
  SmeEngine(const QubitParams& q, const Rates& r, const MonitorConfig& mc,
            double dt);

  static Vector4d to_real(const Matrix2c& rho);
  static Matrix2c to_matrix(const Vector4d& v);

  double dt() const { return dt_; }
  double measure_overlap(const Vector4d& v) const { return meas_proj_.dot(v); }
  double state_energy(const Vector4d& v) const { return energy_.dot(v); }

  // One step: samples the jump, updates v in place, returns the record.
  StepRecord advance(std::uint64_t seed, std::uint64_t traj, std::uint64_t step,
                     Vector4d& v) const {
    const double rho_mm = meas_proj_.dot(v);
    const double e_state = energy_.dot(v);
    StepRecord rec;
    rec.q1 = dt_ * gamma_ * (rho_mm * e_state - 0.5 * energy_anticomm_.dot(v));
    const double p = gamma_dt_ * rho_mm;
    if (uniform01(seed, traj, step) < p) {
      rec.jumped = true;
      rec.q2 = energy_feedback_ - e_state;
      v = feedback_vec_;
    } else {
      v += dt_ * (drift_ * v) + (gamma_dt_ * rho_mm) * v;
      v /= v[0] + v[1];
    }
    return rec;
  }

  // Equilibrates for n_equilibrate steps, then records n_record steps;
  // visit(k, record, v_after) is called for each recorded step.
  template <typename Visitor>
  void run(std::uint64_t seed, std::uint64_t traj, Vector4d v,
           std::size_t n_equilibrate, std::size_t n_record,
           Visitor&& visit) const {
    std::uint64_t step = 0;
    for (std::size_t k = 0; k < n_equilibrate; ++k, ++step)
      advance(seed, traj, step, v);
    for (std::size_t k = 0; k < n_record; ++k, ++step)
      visit(k, advance(seed, traj, step, v), v);
  }

 private:
  Matrix4d drift_;            // linear no-detection drift
  Vector4d meas_proj_;        // rho_mm functional
  Vector4d energy_;           // tr[H0 rho] functional
  Vector4d energy_anticomm_;  // tr[H0 {P_m, rho}] functional
  Vector4d feedback_vec_;     // P_n
  double gamma_ = 0.0;
  double dt_ = 0.0;
  double gamma_dt_ = 0.0;
  double energy_feedback_ = 0.0;  // tr[H0 P_n]
};

// Full trajectory with the standard equilibration: starts from the solver steady
// state, equilibrates for t_equilibrate, records t_window.  Deterministic
// given (master_seed, traj_index).
std::vector<StepRecord> run_trajectory(const TrajectoryConfig& cfg,
                                       const QubitParams& q, const Rates& r,
                                       const MonitorConfig& mc,
                                       std::uint64_t traj_index);

struct MeanPath {
  std::vector<double> times;
  std::vector<Matrix2c> mean;
  std::vector<Vector4d> stderr_components;  // per real component
  std::uint64_t n_traj = 0;
};

// Ensemble average of conditional states from rho0 (no equilibration),
// sampled at the checkpoint times.  Converges to the deterministic Lindblad
// path as n_traj grows.
MeanPath ensemble_mean_state(const TrajectoryConfig& cfg, const QubitParams& q,
                             const Rates& r, const MonitorConfig& mc,
                             const Matrix2c& rho0,
                             const std::vector<double>& checkpoint_times,
                             unsigned n_threads);

}  // namespace qmf
