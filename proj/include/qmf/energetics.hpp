#pragma once

// Energy flows between monitor, baths, and qubit: exact trace formulas on a
// given state, weak-coupling closed forms, bounds and symmetries of the flow
// landscape, zero-flow curves, and the cooling COP.
//
// Sign convention: positive J heats the qubit (energy flows from the monitor
// into the qubit); positive bath flow heats the qubit from that bath.

#include <utility>

#include "qmf/lindblad.hpp"
#include "qmf/qubit.hpp"
#include "qmf/types.hpp"

namespace qmf {

// Monitor flow J split into the no-detection backaction part J1 and the
// quantum-jump part J2; total = J1 + J2 by construction.
struct MonitorFlow {
  double total = 0.0;
  double no_detection = 0.0;  // J^(1)
  double jump = 0.0;          // J^(2)
};

MonitorFlow monitor_flow(const Matrix2c& rho, const QubitParams& q,
                         const MonitorConfig& mc);

// Heat current tr[H0 D_{B,r}[rho]] of a single bath with rates `bath`.
double bath_flow(const Matrix2c& rho, const QubitParams& q, const Rates& bath);

// Coefficient of performance |jc / (jh + jc)|; throws on zero denominator.
double cop(double jc, double jh);

// Steady-state monitor flow from the full 4x4 solve (phases allowed).
MonitorFlow steady_monitor_flow(const QubitParams& q, const Rates& r,
                                const MonitorConfig& mc);

// Weak-coupling closed form of the steady-state flow,
//   J = (gamma delta/2) [g+ (cos tn - cos tm) - g- (1 - cos tm cos tn)]
//       / [gamma (cos tn cos tm - 1) - 2 g+],
// with g± = Gamma+ ± Gamma-.  Phases phi are neglected.
double analytic_flow(double theta_m, double theta_n, const Rates& r, double gamma,
                     const QubitParams& q);

struct FlowBounds {
  double min = 0.0;  // -gamma delta Gamma- / (g+ + gamma)
  double max = 0.0;  // +gamma delta Gamma+ / (g+ + gamma)
};

FlowBounds flow_bounds(const Rates& r, double gamma, const QubitParams& q);

// Closed form on the mirror axis theta_m + theta_n = pi; monotone decreasing
// in theta_m, coincides with the bounds at the endpoints.
double symmetric_axis_flow(double theta_m, const Rates& r, double gamma,
                           const QubitParams& q);

// Relative flow J/J_max (= J/J_min at the other end) for a small offset
// epsilon from the axis endpoints: 1 - [g+/(g+ + gamma)] epsilon^2 / 2.
double quadratic_deviation(double epsilon, const Rates& r, double gamma);

// Near-edge closed form of the zero-flow curve: theta_n(theta_m) for
// theta_m below `kZeroFlowEdge` rad, and the mirrored form near theta_m = pi.
// Mid-range arguments throw; use zero_flow_theta_n_bisect there.
inline constexpr double kZeroFlowEdge = 0.15;
double zero_flow_theta_n(double theta_m, double temperature, const QubitParams& q);

// Root of the numerically exact steady-state J along theta_n at fixed
// theta_m, by bisection to |J| <= 1e-10 gamma delta.
double zero_flow_theta_n_bisect(double theta_m, const QubitParams& q,
                                const Rates& r, double gamma);

// Residual of the detection/no-detection balance condition; zero exactly
// when the total monitor flow vanishes.  Uses the orthogonal_ket phase
// convention, under which the residual is proportional to J itself.
double balance_residual(const Matrix2c& rho, const MonitorConfig& mc);

}  // namespace qmf
