#include "qmf/lindblad.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace qmf {

namespace {

Matrix4c superop_sandwich(const Matrix2c& a, const Matrix2c& b) {
  // vec(a rho b) = (b^T ⊗ a) vec(rho)
  return Eigen::kroneckerProduct(b.transpose(), a);
}

Matrix4c superop_anticommutator(const Matrix2c& a) {
  const Matrix2c id = Matrix2c::Identity();
  return superop_sandwich(a, id) + superop_sandwich(id, a);
}

Matrix4c lindblad_term(const Matrix2c& jump) {
  return superop_sandwich(jump, jump.adjoint()) -
         0.5 * superop_anticommutator(jump.adjoint() * jump);
}

}  // namespace

Matrix2c dissipator_bath(const Matrix2c& rho, const Rates& r) {
  const Matrix2c down = sigma_minus();
  const Matrix2c up = sigma_plus();
  const Matrix2c emission =
      down * rho * up - 0.5 * (up * down * rho + rho * up * down);
  const Matrix2c absorption =
      up * rho * down - 0.5 * (down * up * rho + rho * down * up);
  return r.emission * emission + r.absorption * absorption;
}

Matrix2c dissipator_meas(const Matrix2c& rho, const MonitorConfig& mc) {
  const Matrix2c pm = density(mc.measure);
  const Matrix2c pn = density(mc.feedback);
  const Complex rho_mm = (pm * rho).trace();
  return mc.gamma * (rho_mm * pn - 0.5 * (pm * rho + rho * pm));
}

Matrix4c bath_superoperator(const Rates& r) {
  return r.emission * lindblad_term(sigma_minus()) +
         r.absorption * lindblad_term(sigma_plus());
}

Matrix4c measurement_superoperator(const MonitorConfig& mc) {
  // U P_m = |n><m|, so the sandwich term is a plain Lindblad term with that
  // jump operator.
  const Matrix2c jump = ket(mc.feedback) * ket(mc.measure).adjoint();
  return mc.gamma * lindblad_term(jump);
}

Matrix4c commutator_superoperator(const QubitParams& q) {
  const Matrix2c h = hamiltonian(q);
  return -kI * (superop_sandwich(h, Matrix2c::Identity()) -
                superop_sandwich(Matrix2c::Identity(), h));
}

Liouvillian build_liouvillian(const QubitParams& q, const Rates& r,
                              const MonitorConfig& mc) {
  return commutator_superoperator(q) + bath_superoperator(r) +
         measurement_superoperator(mc);
}

Matrix2c steady_state(const Liouvillian& liouvillian) {
  // Trace preservation makes one row redundant: replace the first row by the
  // trace constraint.  vec indices 0 and 3 are the diagonal entries.
  Matrix4c a = liouvillian;
  a.row(0) << 1, 0, 0, 1;
  Vector4c rhs = Vector4c::Zero();
  rhs(0) = 1.0;

  const Eigen::PartialPivLU<Matrix4c> lu(a);
  const Vector4c v = lu.solve(rhs);

  const double residual = (liouvillian * v).norm();
  const double scale = liouvillian.norm();
  if (!v.allFinite() || residual > 1e-8 * std::max(scale, 1e-300)) {
    Eigen::JacobiSVD<Matrix4c> svd(a);
    const double cond =
        svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
    std::ostringstream msg;
    msg << "steady_state: singular or degenerate generator (residual " << residual
        << ", condition number " << cond << ")";
    throw std::runtime_error(msg.str());
  }
  return hermitized(unvectorize(v));
}

Matrix2c rk4_step(const Matrix2c& rho, const Liouvillian& liouvillian, double dt) {
  const Vector4c v = vectorize(rho);
  const Vector4c k1 = liouvillian * v;
  const Vector4c k2 = liouvillian * (v + 0.5 * dt * k1);
  const Vector4c k3 = liouvillian * (v + 0.5 * dt * k2);
  const Vector4c k4 = liouvillian * (v + dt * k3);
  return hermitized(
      unvectorize(v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
}

std::vector<TimedState> evolve(const Matrix2c& rho0, const Liouvillian& liouvillian,
                               double t_end, double dt, const QubitParams& q) {
  if (!(dt > 0.0) || dt > 0.05 / q.delta)
    throw std::invalid_argument("evolve: dt must be in (0, 0.05/delta]");
  if (!(t_end >= 0.0)) throw std::invalid_argument("evolve: t_end must be >= 0");

  const auto n_steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<TimedState> path;
  path.reserve(n_steps + 1);
  path.push_back({0.0, rho0});
  Matrix2c rho = rho0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    rho = rk4_step(rho, liouvillian, dt);
    path.push_back({static_cast<double>(k) * dt, rho});
  }
  return path;
}

}  // namespace qmf
