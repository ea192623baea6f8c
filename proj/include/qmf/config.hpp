#pragma once

// Run configuration: flat INI-style sections [physics], [monitor],
// [trajectory], [sweep], [output].  Angles are given in units of pi (0.5
// means pi/2); rates, times, and frequencies are in the natural units set by
// delta.  Unknown keys are rejected with line numbers.

#include <optional>
#include <string>
#include <vector>

#include "qmf/noise.hpp"
#include "qmf/qubit.hpp"
#include "qmf/trajectory.hpp"

namespace qmf {

struct RunConfig {
  QubitParams qubit;
  std::optional<Rates> rates;     // direct Gamma± input
  std::optional<BathSpec> baths;  // or microscopic bath list; exactly one
  MonitorConfig monitor;
  TrajectoryConfig trajectory;  // t_equilibrate/t_window 0 = auto
  NoiseMcOptions noise;
  std::vector<double> sweep_theta_m;  // radians
  std::vector<double> sweep_theta_n;
  bool diagonal = false;  // sweep theta_n = theta_m along the theta_m grid
  std::vector<double> sweep_omega;
  std::string output_path;
  std::string raw_text;

  Rates resolved_rates() const;
  // Per-bath rates for heat currents; single entry equal to resolved_rates()
  // when Gamma± are given directly.
  std::vector<Rates> per_bath_rates() const;
  // Fills the auto trajectory windows (10/gamma_+ and 50/gamma_+).
  TrajectoryConfig resolved_trajectory() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace qmf
