#include "qmf/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "qmf/csv.hpp"
#include "qmf/energetics.hpp"
#include "qmf/noise.hpp"
#include "qmf/parallel.hpp"

namespace qmf::cli {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

void apply_overrides(RunConfig& cfg, const Options& opts) {
  if (opts.seed) cfg.trajectory.master_seed = *opts.seed;
  if (opts.n_traj) cfg.trajectory.n_traj = *opts.n_traj;
  if (opts.out) cfg.output_path = *opts.out;
}

unsigned resolve_threads(const Options& opts) {
  return opts.threads > 0 ? opts.threads : default_thread_count();
}

// Runs `body` against the configured output (stdout for "-" or empty).
template <typename Body>
int with_output(const RunConfig& cfg, Body&& body) {
  if (cfg.output_path.empty() || cfg.output_path == "-") {
    body(std::cout);
    return 0;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file " << cfg.output_path << "\n";
    return 1;
  }
  body(out);
  return 0;
}

void common_metadata(CsvWriter& csv, const RunConfig& cfg, const char* command) {
  csv.metadata("version", std::string_view(kVersion));
  csv.metadata("command", std::string_view(command));
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg.raw_text)));
  csv.metadata("config_hash", std::string_view(hash));
}

struct BathFlows {
  double cold = 0.0;
  double hot = 0.0;
};

// Heat currents split into the coldest bath and the rest.  With direct
// Gamma± input there is a single effective bath; its current is reported in
// the cold column.
BathFlows split_bath_flows(const Matrix2c& rho, const RunConfig& cfg) {
  const std::vector<Rates> per_bath = cfg.per_bath_rates();
  BathFlows flows;
  if (!cfg.baths || per_bath.size() == 1) {
    flows.cold = bath_flow(rho, cfg.qubit, per_bath.front());
    return flows;
  }
  std::size_t coldest = 0;
  for (std::size_t i = 1; i < cfg.baths->baths.size(); ++i)
    if (cfg.baths->baths[i].temperature < cfg.baths->baths[coldest].temperature)
      coldest = i;
  for (std::size_t i = 0; i < per_bath.size(); ++i) {
    const double j = bath_flow(rho, cfg.qubit, per_bath[i]);
    if (i == coldest)
      flows.cold += j;
    else
      flows.hot += j;
  }
  return flows;
}

MonitorConfig monitor_at(const RunConfig& cfg, double theta_m, double theta_n) {
  return MonitorConfig(cfg.monitor.gamma,
                       BlochState(theta_m, cfg.monitor.measure.phi),
                       BlochState(theta_n, cfg.monitor.feedback.phi));
}

struct SweepPoint {
  double theta_m;
  double theta_n;
};

std::vector<SweepPoint> sweep_points(const RunConfig& cfg, const char* command) {
  if (cfg.sweep_theta_m.empty())
    throw std::invalid_argument(std::string(command) +
                                ": [sweep] theta_m grid required");
  std::vector<SweepPoint> points;
  if (cfg.diagonal) {
    for (double tm : cfg.sweep_theta_m) points.push_back({tm, tm});
    return points;
  }
  if (cfg.sweep_theta_n.empty())
    throw std::invalid_argument(std::string(command) +
                                ": [sweep] theta_n grid required (or diagonal = true)");
  for (double tm : cfg.sweep_theta_m)
    for (double tn : cfg.sweep_theta_n) points.push_back({tm, tn});
  return points;
}

// Row-major sweep of the steady state, parallel over grid cells with
// deterministic ordering.
template <typename RowFn>
void parallel_sweep(const std::vector<SweepPoint>& points, unsigned threads,
                    std::vector<std::vector<double>>& rows, RowFn&& fn) {
  rows.assign(points.size(), {});
  parallel_blocks(points.size(), threads,
                  [&](std::size_t i) { rows[i] = fn(points[i]); });
}

}  // namespace

int run_steady(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  const Rates rates = cfg.resolved_rates();
  const Matrix2c rho =
      steady_state(build_liouvillian(cfg.qubit, rates, cfg.monitor));
  const MonitorFlow flow = monitor_flow(rho, cfg.qubit, cfg.monitor);
  const BathFlows bath = split_bath_flows(rho, cfg);

  return with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "steady");
    csv.header({"theta_m", "theta_n", "sigma_z", "rho_gg", "rho_ee", "re_rho_ge",
                "im_rho_ge", "J", "J1", "J2", "Jc", "Jh"});
    csv.row({cfg.monitor.measure.theta / kPi, cfg.monitor.feedback.theta / kPi,
             sigma_z_expectation(rho), rho(0, 0).real(), rho(1, 1).real(),
             rho(0, 1).real(), rho(0, 1).imag(), flow.total, flow.no_detection,
             flow.jump, bath.cold, bath.hot});
  });
}

int run_sweep_flow(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  const Rates rates = cfg.resolved_rates();
  const auto points = sweep_points(cfg, "sweep-flow");

  std::vector<std::vector<double>> rows;
  parallel_sweep(points, resolve_threads(opts), rows, [&](const SweepPoint& p) {
    const MonitorConfig mc = monitor_at(cfg, p.theta_m, p.theta_n);
    const Matrix2c rho = steady_state(build_liouvillian(cfg.qubit, rates, mc));
    const MonitorFlow flow = monitor_flow(rho, cfg.qubit, mc);
    const BathFlows bath = split_bath_flows(rho, cfg);
    const double j_analytic =
        analytic_flow(p.theta_m, p.theta_n, rates, mc.gamma, cfg.qubit);
    return std::vector<double>{p.theta_m / kPi, p.theta_n / kPi,  flow.total,
                               j_analytic,      flow.no_detection, flow.jump,
                               bath.cold,       bath.hot};
  });

  return with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "sweep-flow");
    csv.header({"theta_m", "theta_n", "J_numeric", "J_analytic", "J1", "J2",
                "Jc", "Jh"});
    for (const auto& row : rows) csv.row(row);
  });
}

int run_cooling(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  if (!cfg.baths || cfg.baths->baths.size() < 2)
    throw std::invalid_argument("cooling: needs at least two baths in [physics]");
  const Rates rates = cfg.resolved_rates();
  const auto points = sweep_points(cfg, "cooling");

  std::vector<std::vector<double>> rows;
  parallel_sweep(points, resolve_threads(opts), rows, [&](const SweepPoint& p) {
    const MonitorConfig mc = monitor_at(cfg, p.theta_m, p.theta_n);
    const Matrix2c rho = steady_state(build_liouvillian(cfg.qubit, rates, mc));
    const MonitorFlow flow = monitor_flow(rho, cfg.qubit, mc);
    const BathFlows bath = split_bath_flows(rho, cfg);
    const double denom = bath.hot + bath.cold;
    const double cop_value = denom == 0.0 ? kNan : cop(bath.cold, bath.hot);
    return std::vector<double>{p.theta_m / kPi, p.theta_n / kPi, flow.total,
                               bath.cold,       bath.hot,        cop_value};
  });

  return with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "cooling");
    csv.header({"theta_m", "theta_n", "J", "Jc", "Jh", "cop"});
    for (const auto& row : rows) csv.row(row);
  });
}

int run_trajectory_dump(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  const Rates rates = cfg.resolved_rates();
  const TrajectoryConfig tcfg = cfg.resolved_trajectory();
  validate(tcfg, cfg.qubit, rates, cfg.monitor);

  const Matrix2c rho_ss =
      steady_state(build_liouvillian(cfg.qubit, rates, cfg.monitor));
  for (const std::string& w :
       regime_warnings(tcfg, cfg.qubit, rates, cfg.monitor, rho_ss))
    std::cerr << "warning: " << w << "\n";

  return with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "trajectory");
    csv.metadata("seed", tcfg.master_seed);
    csv.metadata("n_traj", tcfg.n_traj);
    csv.metadata("dt", tcfg.dt);
    csv.header({"step", "jumped", "q1", "q2"});
    for (std::uint64_t traj = 0; traj < tcfg.n_traj; ++traj) {
      os << "# trajectory " << traj << "\n";
      const auto records = run_trajectory(tcfg, cfg.qubit, rates, cfg.monitor, traj);
      for (std::size_t k = 0; k < records.size(); ++k)
        csv.row({static_cast<double>(k), records[k].jumped ? 1.0 : 0.0,
                 records[k].q1, records[k].q2});
    }
  });
}

int run_noise(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  const Rates rates = cfg.resolved_rates();
  const TrajectoryConfig tcfg = cfg.resolved_trajectory();
  const bool with_mc = tcfg.n_traj > 0;
  if (with_mc) validate(tcfg, cfg.qubit, rates, cfg.monitor);
  const auto points = sweep_points(cfg, "noise");
  const unsigned threads = resolve_threads(opts);
  const Timer timer;

  // Rows are computed and flushed one grid point at a time, so an
  // interrupted sweep leaves a usable partial CSV.
  const int rc = with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "noise");
    csv.metadata("seed", tcfg.master_seed);
    csv.metadata("n_traj", with_mc ? tcfg.n_traj : 0);
    csv.metadata("dt", tcfg.dt);
    csv.header({"theta_m", "theta_n", "S0_analytic", "S0_mc", "S0_stderr",
                "S1_analytic", "S1_mc", "S1_stderr", "fano_analytic", "fano_mc",
                "q_jump", "q_ex"});
    bool warned = false;
    double max_tail = 0.0;
    for (const SweepPoint& point : points) {
      const MonitorConfig mc = monitor_at(cfg, point.theta_m, point.theta_n);
      const NoiseClosedForm closed =
          noise_closed_form(cfg.qubit, rates, mc, tcfg.dt);
      max_tail = std::max(max_tail, closed.q_ex_tail);

      double s0_mc = kNan, s0_err = kNan, s1_mc = kNan, s1_err = kNan,
             fano_mc = kNan;
      if (with_mc) {
        if (!warned) {
          const Matrix2c rho_ss =
              steady_state(build_liouvillian(cfg.qubit, rates, mc));
          for (const std::string& w :
               regime_warnings(tcfg, cfg.qubit, rates, mc, rho_ss))
            std::cerr << "warning: " << w << "\n";
          warned = true;
        }
        const CorrelationSeries series =
            ensemble_correlation(tcfg, cfg.qubit, rates, mc, cfg.noise, threads);
        const NoiseEstimate est = spectrum_mc(series, {}).dc;
        s0_mc = est.s0;
        s0_err = est.s0_stderr;
        s1_mc = est.s1_dc;
        s1_err = est.s1_stderr;
        fano_mc = est.fano;
      }
      csv.row({point.theta_m / kPi, point.theta_n / kPi, closed.s0, s0_mc,
               s0_err, closed.s1, s1_mc, s1_err, closed.fano, fano_mc,
               closed.q_jump, closed.q_ex});
      os.flush();
    }
    // Sensitivity of q_ex to the transient integration cutoff.
    os << "# qex_tail_bound_max = " << format_double(max_tail) << "\n";
  });
  std::cerr << "noise: " << points.size() << " grid points in "
            << format_double(timer.seconds()) << " s\n";
  return rc;
}

int run_spectrum(RunConfig cfg, const Options& opts) {
  apply_overrides(cfg, opts);
  const Rates rates = cfg.resolved_rates();
  const TrajectoryConfig tcfg = cfg.resolved_trajectory();
  validate(tcfg, cfg.qubit, rates, cfg.monitor);
  const Timer timer;

  std::vector<double> omegas = cfg.sweep_omega;
  if (omegas.empty()) {
    for (int i = 0; i <= 120; ++i)
      omegas.push_back(3.0 * cfg.qubit.delta * static_cast<double>(i) / 120.0);
  }

  const CorrelationSeries series = ensemble_correlation(
      tcfg, cfg.qubit, rates, cfg.monitor, cfg.noise, resolve_threads(opts));
  const SpectrumResult spectrum = spectrum_mc(series, omegas);

  const int rc = with_output(cfg, [&](std::ostream& os) {
    CsvWriter csv(os);
    common_metadata(csv, cfg, "spectrum");
    csv.metadata("seed", tcfg.master_seed);
    csv.metadata("n_traj", tcfg.n_traj);
    csv.metadata("dt", tcfg.dt);
    csv.metadata("S0", spectrum.dc.s0);
    csv.metadata("S0_stderr", spectrum.dc.s0_stderr);
    csv.header({"omega", "S1", "S_total"});
    for (std::size_t i = 0; i < omegas.size(); ++i)
      csv.row({omegas[i], spectrum.s1[i], spectrum.dc.s0 + spectrum.s1[i]});
  });
  std::cerr << "spectrum: " << format_double(timer.seconds()) << " s\n";
  return rc;
}

}  // namespace qmf::cli
