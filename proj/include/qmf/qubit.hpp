#pragma once

// Qubit domain types and 2x2 operator algebra.
//
// Basis ordering is {|g>, |e>} with sigma_z|g> = -|g>, sigma_z|e> = +|e>,
// so H0 = (delta/2) sigma_z = diag(-delta/2, +delta/2).  Bloch states are
// |s> = cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>: theta = 0 is the ground
// state, theta = pi the excited state.  Units: delta = 1, hbar = k_B = 1.

#include <vector>

#include "qmf/types.hpp"

namespace qmf {

struct BlochState {
  double theta = 0.0;  // polar angle in [0, pi]
  double phi = 0.0;    // azimuthal angle, normalized into [0, 2 pi)

  BlochState() = default;
  BlochState(double theta_, double phi_);
};

struct QubitParams {
  double delta = 1.0;  // energy splitting, sets the unit of energy

  QubitParams() = default;
  explicit QubitParams(double delta_);
};

struct Bath {
  double temperature = 1.0;  // T_r > 0
  double coupling = 0.01;    // dimensionless Ohmic coupling alpha_r >= 0
};

struct BathSpec {
  std::vector<Bath> baths;
  double cutoff = 1000.0;  // shared exponential cutoff omega_c
};

// Total emission (Gamma+) and absorption (Gamma-) rates of the bath set.
struct Rates {
  double emission = 0.0;    // Gamma+
  double absorption = 0.0;  // Gamma-

  // Paper combinations gamma_± = Gamma+ ± Gamma-.
  double relax() const { return emission + absorption; }  // gamma+
  double net() const { return emission - absorption; }    // gamma-
};

struct MonitorConfig {
  double gamma = 0.0;   // measurement strength, >= 0
  BlochState measure;   // |m>
  BlochState feedback;  // |n>

  MonitorConfig() = default;
  MonitorConfig(double gamma_, BlochState measure_, BlochState feedback_);
};

struct EffectiveBath {
  double coupling = 0.0;     // alpha_eff
  double temperature = 0.0;  // T_eff
};

// Fixed operators in the {|g>, |e>} basis.
inline Vector2c ground_ket() { return Vector2c(1.0, 0.0); }
inline Vector2c excited_ket() { return Vector2c(0.0, 1.0); }

inline Matrix2c sigma_x() { return (Matrix2c() << 0, 1, 1, 0).finished(); }
inline Matrix2c sigma_y() { return (Matrix2c() << 0, kI, -kI, 0).finished(); }
inline Matrix2c sigma_z() { return (Matrix2c() << -1, 0, 0, 1).finished(); }
inline Matrix2c sigma_plus() { return excited_ket() * ground_ket().adjoint(); }
inline Matrix2c sigma_minus() { return ground_ket() * excited_ket().adjoint(); }

inline Matrix2c hamiltonian(const QubitParams& q) {
  return 0.5 * q.delta * sigma_z();
}

// |s> = cos(theta/2)|g> + e^{i phi} sin(theta/2)|e>
Vector2c ket(const BlochState& s);

// Orthogonal complement |s̄> = sin(theta/2)|g> - e^{i phi} cos(theta/2)|e>.
// The overall phase is a fixed convention; density-matrix level results do
// not depend on it.
Vector2c orthogonal_ket(const BlochState& s);

// Rank-1 projector |s><s|.
Matrix2c density(const BlochState& s);

// U_{nm} = |n><m| + |n̄><m̄|; maps |m> to |n> up to global phase.
Matrix2c feedback_unitary(const BlochState& m, const BlochState& n);

// Bose occupation n(omega) = 1/(e^{omega/T} - 1); underflows to 0 for
// omega/T large.
double bose_occupation(double omega, double temperature);

// Ohmic spectral density I(omega) = 2 alpha omega e^{-omega/omega_c}.
double ohmic_spectral_density(double omega, double coupling, double cutoff);

// Born-Markov rates of a single bath evaluated at the qubit frequency:
//   Gamma+ = (pi/2) I(delta) [1 + n(delta)],  Gamma- = (pi/2) I(delta) n(delta).
Rates bath_rates(const Bath& bath, double cutoff, const QubitParams& q);

// Componentwise sum of bath_rates over the bath list.
Rates rates_from_baths(const BathSpec& baths, const QubitParams& q);

// Single effective bath reproducing the total rates:
//   T_eff = delta / ln(Gamma+/Gamma-), alpha_eff from the Ohmic rate formula.
// Gamma- = 0 maps to T_eff = 0.  Throws if Gamma+ <= Gamma-.
EffectiveBath effective_bath(const Rates& r, const QubitParams& q, double cutoff);

// <sigma_z> = rho_ee - rho_gg.
inline double sigma_z_expectation(const Matrix2c& rho) {
  return rho(1, 1).real() - rho(0, 0).real();
}

inline Matrix2c hermitized(const Matrix2c& a) { return 0.5 * (a + a.adjoint()); }

// Trace ~1, Hermitian, eigenvalues >= -eig_tol.
bool is_density_matrix(const Matrix2c& rho, double trace_tol = 1e-10,
                       double eig_tol = 1e-9);

}  // namespace qmf
