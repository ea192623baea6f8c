#pragma once

// Superoperator construction and deterministic evolution of the master
// equation
//
//   d rho/dt = -i[H0, rho] + D_B[rho] + D_M[rho]
//
// with the bath dissipator D_B (emission/absorption at rates Gamma±) and the
// measurement-feedback dissipator D_M.  Density matrices are vectorized by
// column stacking, vec(rho) = (rho_gg, rho_eg, rho_ge, rho_ee), under which
// vec(A rho B) = (B^T ⊗ A) vec(rho).

#include <vector>

#include "qmf/qubit.hpp"
#include "qmf/types.hpp"

namespace qmf {

// 4x4 generator acting on the column-stacked density matrix.
using Liouvillian = Matrix4c;

inline Vector4c vectorize(const Matrix2c& rho) {
  return Eigen::Map<const Vector4c>(rho.data());
}

inline Matrix2c unvectorize(const Vector4c& v) {
  return Eigen::Map<const Matrix2c>(v.data());
}

// D_B[rho] = sum_{s=±} Gamma_s (sigma_{-s} rho sigma_s - {sigma_s sigma_{-s}, rho}/2).
Matrix2c dissipator_bath(const Matrix2c& rho, const Rates& r);

// D_M[rho] = gamma [U P_m rho P_m U† - {P_m, rho}/2]
//          = gamma [rho_mm P_n - {P_m, rho}/2].
Matrix2c dissipator_meas(const Matrix2c& rho, const MonitorConfig& mc);

// Superoperator pieces, usable per bath for heat-current bookkeeping.
Matrix4c bath_superoperator(const Rates& r);
Matrix4c measurement_superoperator(const MonitorConfig& mc);
Matrix4c commutator_superoperator(const QubitParams& q);  // vec(-i[H0, rho])

Liouvillian build_liouvillian(const QubitParams& q, const Rates& r,
                              const MonitorConfig& mc);

// Solves L vec(rho) = 0 with one row replaced by the trace constraint.
// Throws if the generator is degenerate (e.g. gamma = 0 and Gamma± = 0) or
// the solve leaves a large residual; the message reports the condition
// number.
Matrix2c steady_state(const Liouvillian& liouvillian);

// Classical fixed-step 4th-order integration of the linear system.
Matrix2c rk4_step(const Matrix2c& rho, const Liouvillian& liouvillian, double dt);

struct TimedState {
  double t = 0.0;
  Matrix2c rho;
};

// Integrates rho0 to t_end, sampling every step.  Requires dt <= 0.05/delta
// so the coherent oscillation at frequency ~delta is resolved.
std::vector<TimedState> evolve(const Matrix2c& rho0, const Liouvillian& liouvillian,
                               double t_end, double dt, const QubitParams& q);

}  // namespace qmf
