#include "qmf/energetics.hpp"

#include <cmath>
#include <stdexcept>

namespace qmf {

MonitorFlow monitor_flow(const Matrix2c& rho, const QubitParams& q,
                         const MonitorConfig& mc) {
  const Matrix2c h = hamiltonian(q);
  const Matrix2c pm = density(mc.measure);
  const Matrix2c pn = density(mc.feedback);

  const double rho_mm = (pm * rho).trace().real();
  const double energy_feedback = (h * pn).trace().real();
  const double energy_state = (h * rho).trace().real();
  // tr[H0 {P_m, rho}] = 2 Re tr[H0 P_m rho]
  const double anticomm = 2.0 * (h * pm * rho).trace().real();

  MonitorFlow flow;
  flow.no_detection = mc.gamma * (rho_mm * energy_state - 0.5 * anticomm);
  flow.jump = mc.gamma * rho_mm * (energy_feedback - energy_state);
  flow.total = flow.no_detection + flow.jump;
  return flow;
}

double bath_flow(const Matrix2c& rho, const QubitParams& q, const Rates& bath) {
  return (hamiltonian(q) * dissipator_bath(rho, bath)).trace().real();
}

double cop(double jc, double jh) {
  const double denom = jh + jc;
  if (denom == 0.0) throw std::invalid_argument("cop: jh + jc = 0, COP undefined");
  return std::abs(jc / denom);
}

MonitorFlow steady_monitor_flow(const QubitParams& q, const Rates& r,
                                const MonitorConfig& mc) {
  const Matrix2c rho = steady_state(build_liouvillian(q, r, mc));
  return monitor_flow(rho, q, mc);
}

double analytic_flow(double theta_m, double theta_n, const Rates& r, double gamma,
                     const QubitParams& q) {
  const double cm = std::cos(theta_m);
  const double cn = std::cos(theta_n);
  const double gp = r.relax();
  const double gm = r.net();
  const double numerator = gp * (cn - cm) - gm * (1.0 - cm * cn);
  const double denominator = gamma * (cn * cm - 1.0) - 2.0 * gp;
  return 0.5 * gamma * q.delta * numerator / denominator;
}

FlowBounds flow_bounds(const Rates& r, double gamma, const QubitParams& q) {
  const double scale = gamma * q.delta / (r.relax() + gamma);
  return FlowBounds{-scale * r.absorption, scale * r.emission};
}

double symmetric_axis_flow(double theta_m, const Rates& r, double gamma,
                           const QubitParams& q) {
  const double cm = std::cos(theta_m);
  const double gp = r.relax();
  const double gm = r.net();
  return 0.5 * gamma * q.delta * (gm * (1.0 + cm * cm) + 2.0 * gp * cm) /
         (gamma * (1.0 + cm * cm) + 2.0 * gp);
}

double quadratic_deviation(double epsilon, const Rates& r, double gamma) {
  const double gp = r.relax();
  return 1.0 - gp / (gp + gamma) * 0.5 * epsilon * epsilon;
}

double zero_flow_theta_n(double theta_m, double temperature, const QubitParams& q) {
  const double boltzmann = std::exp(-0.5 * q.delta / temperature);
  if (theta_m < kZeroFlowEdge) return boltzmann * theta_m;
  if (kPi - theta_m < kZeroFlowEdge) return kPi - (kPi - theta_m) / boltzmann;
  throw std::invalid_argument(
      "zero_flow_theta_n: closed form valid only near the edges; "
      "use zero_flow_theta_n_bisect for mid-range theta_m");
}

double zero_flow_theta_n_bisect(double theta_m, const QubitParams& q,
                                const Rates& r, double gamma) {
  const auto flow_at = [&](double theta_n) {
    const MonitorConfig mc(gamma, BlochState(theta_m, 0.0), BlochState(theta_n, 0.0));
    return steady_monitor_flow(q, r, mc).total;
  };

  double lo = 0.0;
  double hi = kPi;
  double f_lo = flow_at(lo);
  double f_hi = flow_at(hi);
  const double tol = 1e-10 * gamma * q.delta;
  if (std::abs(f_lo) <= tol) return lo;
  if (std::abs(f_hi) <= tol) return hi;
  if (f_lo > 0.0 || f_hi < 0.0)
    throw std::runtime_error("zero_flow_theta_n_bisect: no sign change over [0, pi]");

  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = flow_at(mid);
    if (std::abs(f_mid) <= tol) return mid;
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double balance_residual(const Matrix2c& rho, const MonitorConfig& mc) {
  const Vector2c m = ket(mc.measure);
  const Vector2c m_perp = orthogonal_ket(mc.measure);
  const double rho_mm = (m.adjoint() * rho * m)(0).real();
  const double coherence = (m.adjoint() * rho * m_perp)(0).real();
  return rho_mm * (std::cos(mc.measure.theta) - std::cos(mc.feedback.theta)) +
         std::sin(mc.measure.theta) * coherence;
}

}  // namespace qmf
