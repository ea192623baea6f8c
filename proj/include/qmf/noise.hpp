#pragma once

// Fluctuation statistics of the monitor energy flow.
//
// The correlation of the per-step energy change splits into a time-local
// part (Poisson noise S0, from the jump events themselves) and a time
// non-local part (backaction noise S1, from the relaxation transient after a
// jump).  Closed forms in the rare-jump regime:
//
//   S0 = 2 gamma rho_mm Q_jump^2,          Q_jump = tr[H0 (P_n - rho_ss)]
//   S1 = 4 gamma rho_mm (Q_jump + Q_ex/2) Q_ex
//   F  = (S0 + S1)/S0 = (1 + Q_ex/Q_jump)^2
//
// with Q_ex the excess energy integrated over the transient from the
// post-selected state P_n.  Monte Carlo estimators accumulate lag
// correlations of delta Q = (q1 + q2) - J dt over steady-state windows.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qmf/qubit.hpp"
#include "qmf/trajectory.hpp"
#include "qmf/types.hpp"

namespace qmf {

// -(delta/2)(cos theta_n + <sigma_z>).
double q_jump(const Matrix2c& rho_ss, const QubitParams& q, double theta_n);

struct ExcessEnergy {
  double value = 0.0;   // integral of [J(t; rho0=P_n) - J_ss]
  double tail = 0.0;    // bound on the truncated tail
  double t_stop = 0.0;  // integration stop time
};

// Transient integration from rho(0) = P_n with the deterministic engine,
// trapezoidal at the integrator step, until |J(t)-J| stays below
// 1e-10 max(|J|, gamma delta) or t = 50/gamma_+.  Throws on non-convergence
// with a tail estimate in the message.
ExcessEnergy excess_energy(const QubitParams& q, const Rates& r,
                           const MonitorConfig& mc, double dt = 0.0);

// Poisson noise from an exact steady state: 2 gamma rho_mm Q_jump^2.
double s0_from_state(const Matrix2c& rho_ss, const QubitParams& q,
                     const MonitorConfig& mc);

// Weak-coupling <sigma_z> and the corresponding closed form of S0.
double sigma_z_weak_coupling(double theta_m, double theta_n, const Rates& r,
                             double gamma);
double s0_weak_coupling(double theta_m, double theta_n, const Rates& r,
                        double gamma, const QubitParams& q);

// Backaction noise dc limit, 4 gamma rho_mm (Q_jump + Q_ex/2) Q_ex.
double s1_dc_closed(double gamma, double rho_mm, double q_jump_value,
                    double q_ex_value);

// (1 + Q_ex/Q_jump)^2; +inf at Q_jump = 0 (the Fano factor diverges there).
double fano_closed(double q_jump_value, double q_ex_value);

inline double fano_from_spectra(double s0, double s1) { return (s0 + s1) / s0; }

// All closed-form quantities at one monitor setting, sharing one steady
// state so the algebraic identities between them hold to rounding.
struct NoiseClosedForm {
  double s0 = 0.0;
  double s1 = 0.0;
  double fano = 0.0;
  double q_jump = 0.0;
  double q_ex = 0.0;
  double q_ex_tail = 0.0;  // cutoff sensitivity of q_ex
  double rho_mm = 0.0;
  double sigma_z = 0.0;
  double steady_flow = 0.0;
};

NoiseClosedForm noise_closed_form(const QubitParams& q, const Rates& r,
                                  const MonitorConfig& mc, double dt = 0.0);

// Monte Carlo estimates with standard errors across trajectories.
struct NoiseEstimate {
  double s0 = 0.0;
  double s0_stderr = 0.0;
  double s1_dc = 0.0;
  double s1_stderr = 0.0;
  double fano = 0.0;
  double fano_stderr = 0.0;
  double q_jump = 0.0;  // filled from the closed-form path when assembled
  double q_ex = 0.0;
  std::uint64_t n_traj = 0;
};

struct NoiseMcOptions {
  double bin_width = 0.0;            // lag bin; 0 -> 0.1/delta
  double max_lag = 0.0;              // 0 -> 20/gamma_+
  bool subtract_sample_mean = false; // diagnostics: subtract the per-trajectory
                                     // mean instead of the solver flow
};

// Lag correlations of the energy-change fluctuation.  c1[0] holds the
// non-local part of the zero-lag bin (local spike removed); c1[l] the lag-l
// binned correlation.  The estimator is even in the lag by construction.
struct CorrelationSeries {
  double c0 = 0.0;  // local part per unit time: E[dQ^2]/dt
  Eigen::ArrayXd c1;
  double dt = 0.0;
  double bin_width = 0.0;
  std::uint64_t n_traj = 0;
  // Per-trajectory moments of (s0_t, s1_t) for standard errors.
  double s0_mean = 0.0, s0_var = 0.0;
  double s1_mean = 0.0, s1_var = 0.0;
  double s0_s1_cov = 0.0;
  // Window-mean conditional flow across trajectories.
  double flow_mean = 0.0, flow_var = 0.0;

  double c1_at(std::ptrdiff_t lag) const { return c1[std::abs(lag)]; }
  double flow_stderr() const {
    return std::sqrt(flow_var / static_cast<double>(n_traj));
  }
  double s0_stderr() const {
    return std::sqrt(s0_var / static_cast<double>(n_traj));
  }
};

// Correlations from explicit record sequences (offline analysis path).
CorrelationSeries correlation_mc(std::span<const std::vector<StepRecord>> records,
                                 double steady_flow, double dt,
                                 const QubitParams& q, const Rates& r,
                                 const NoiseMcOptions& opts = {});

// Streaming ensemble runner: generates cfg.n_traj trajectories and
// accumulates correlations without storing the records.
CorrelationSeries ensemble_correlation(const TrajectoryConfig& cfg,
                                       const QubitParams& q, const Rates& r,
                                       const MonitorConfig& mc,
                                       const NoiseMcOptions& opts,
                                       unsigned n_threads);

struct SpectrumResult {
  std::vector<double> omega;
  std::vector<double> s1;  // S1(omega)
  NoiseEstimate dc;
};

// S0 from the local part, S1(omega) by discrete cosine transform of c1,
// dc values packaged with standard errors.
SpectrumResult spectrum_mc(const CorrelationSeries& series,
                           const std::vector<double>& omegas);

}  // namespace qmf
