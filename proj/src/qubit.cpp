#include "qmf/qubit.hpp"

#include <cmath>
#include <stdexcept>

namespace qmf {

namespace {

double wrap_phi(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  // fmod can return exactly 2*pi after the correction when phi is a tiny
  // negative number.
  if (w >= 2.0 * kPi) w = 0.0;
  return w;
}

}  // namespace

BlochState::BlochState(double theta_, double phi_) : theta(theta_), phi(wrap_phi(phi_)) {
  constexpr double slack = 1e-12;
  if (!(theta_ >= -slack && theta_ <= kPi + slack))
    throw std::invalid_argument("BlochState: theta outside [0, pi]");
  if (theta < 0.0) theta = 0.0;
  if (theta > kPi) theta = kPi;
}

QubitParams::QubitParams(double delta_) : delta(delta_) {
  if (!(delta > 0.0)) throw std::invalid_argument("QubitParams: delta must be > 0");
}

MonitorConfig::MonitorConfig(double gamma_, BlochState measure_, BlochState feedback_)
    : gamma(gamma_), measure(measure_), feedback(feedback_) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("MonitorConfig: gamma must be >= 0");
}

Vector2c ket(const BlochState& s) {
  const double c = std::cos(0.5 * s.theta);
  const double n = std::sin(0.5 * s.theta);
  return Vector2c(Complex(c, 0.0), std::polar(n, s.phi));
}

Vector2c orthogonal_ket(const BlochState& s) {
  const double c = std::cos(0.5 * s.theta);
  const double n = std::sin(0.5 * s.theta);
  return Vector2c(Complex(n, 0.0), -std::polar(c, s.phi));
}

Matrix2c density(const BlochState& s) {
  const Vector2c v = ket(s);
  return v * v.adjoint();
}

Matrix2c feedback_unitary(const BlochState& m, const BlochState& n) {
  return ket(n) * ket(m).adjoint() + orthogonal_ket(n) * orthogonal_ket(m).adjoint();
}

double bose_occupation(double omega, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("bose_occupation: temperature must be > 0");
  // expm1 overflows to +inf for large omega/T, giving n = 0 without UB.
  return 1.0 / std::expm1(omega / temperature);
}

double ohmic_spectral_density(double omega, double coupling, double cutoff) {
  return 2.0 * coupling * omega * std::exp(-omega / cutoff);
}

Rates bath_rates(const Bath& bath, double cutoff, const QubitParams& q) {
  if (!(bath.temperature > 0.0))
    throw std::invalid_argument("bath_rates: temperature must be > 0");
  if (!(bath.coupling >= 0.0))
    throw std::invalid_argument("bath_rates: coupling must be >= 0");
  if (!(cutoff > 0.0)) throw std::invalid_argument("bath_rates: cutoff must be > 0");
  const double spectral = ohmic_spectral_density(q.delta, bath.coupling, cutoff);
  const double occupation = bose_occupation(q.delta, bath.temperature);
  return Rates{0.5 * kPi * spectral * (1.0 + occupation),
               0.5 * kPi * spectral * occupation};
}

Rates rates_from_baths(const BathSpec& baths, const QubitParams& q) {
  if (baths.baths.empty())
    throw std::invalid_argument("rates_from_baths: need at least one bath");
  Rates total;
  for (const Bath& b : baths.baths) {
    const Rates r = bath_rates(b, baths.cutoff, q);
    total.emission += r.emission;
    total.absorption += r.absorption;
  }
  return total;
}

EffectiveBath effective_bath(const Rates& r, const QubitParams& q, double cutoff) {
  if (!(r.emission > r.absorption) || !(r.absorption >= 0.0))
    throw std::invalid_argument(
        "effective_bath: requires Gamma+ > Gamma- >= 0 (no positive temperature)");
  EffectiveBath eff;
  eff.temperature =
      r.absorption == 0.0 ? 0.0 : q.delta / std::log(r.emission / r.absorption);
  // Invert (pi/2) * 2 alpha delta e^{-delta/omega_c} = Gamma+ - Gamma-.
  eff.coupling = r.net() / (kPi * q.delta * std::exp(-q.delta / cutoff));
  return eff;
}

bool is_density_matrix(const Matrix2c& rho, double trace_tol, double eig_tol) {
  if (std::abs(rho.trace().real() - 1.0) > trace_tol) return false;
  if (std::abs(rho.trace().imag()) > trace_tol) return false;
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) return false;
  Eigen::SelfAdjointEigenSolver<Matrix2c> es(hermitized(rho));
  return es.eigenvalues().minCoeff() >= -eig_tol;
}

}  // namespace qmf
