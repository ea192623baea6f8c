#include "qmf/noise.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qmf/energetics.hpp"
#include "qmf/parallel.hpp"

namespace qmf {

namespace {

constexpr std::size_t kTrajPerBlock = 64;

struct McGrid {
  std::size_t bin_steps = 0;  // native steps per lag bin
  std::size_t n_lags = 0;     // largest lag index (inclusive)
};

McGrid resolve_grid(const NoiseMcOptions& opts, const QubitParams& q,
                    const Rates& r, double dt, std::size_t window_steps) {
  const double bin_width = opts.bin_width > 0.0 ? opts.bin_width : 0.1 / q.delta;
  const double max_lag = opts.max_lag > 0.0 ? opts.max_lag : 20.0 / r.relax();
  McGrid grid;
  grid.bin_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(bin_width / dt)));
  grid.n_lags = static_cast<std::size_t>(std::llround(max_lag / (static_cast<double>(grid.bin_steps) * dt)));
  const std::size_t n_bins = window_steps / grid.bin_steps;
  if (grid.n_lags + 1 > n_bins)
    throw std::invalid_argument(
        "noise: record window shorter than the requested maximum lag");
  return grid;
}

// Per-trajectory correlation sums over one delta-Q series.  The whole bin
// series is kept (a few KB) so the lag sums run as contiguous dot products.
class TrajectoryCorrelator {
 public:
  TrajectoryCorrelator(std::size_t bin_steps, std::size_t n_lags)
      : bin_steps_(bin_steps), n_lags_(n_lags) {}

  void reset() {
    bins_.clear();
    sum_sq_ = 0.0;
    sum_sq_binned_ = 0.0;
    sum_sq_pending_ = 0.0;
    n_steps_ = 0;
    bin_acc_ = 0.0;
    steps_in_bin_ = 0;
  }

  void add(double dq) {
    sum_sq_ += dq * dq;
    sum_sq_pending_ += dq * dq;
    ++n_steps_;
    bin_acc_ += dq;
    if (++steps_in_bin_ == bin_steps_) {
      bins_.push_back(bin_acc_);
      sum_sq_binned_ += sum_sq_pending_;
      sum_sq_pending_ = 0.0;
      bin_acc_ = 0.0;
      steps_in_bin_ = 0;
    }
  }

  // Finalized per-trajectory statistics; dt is the native step.
  struct Stats {
    double c0 = 0.0;   // E[dQ^2]/dt
    double s0 = 0.0;   // 2 c0
    double s1 = 0.0;   // total dc spectrum minus s0
    Eigen::ArrayXd c1; // c1[0] nonlocal bin-0 part, c1[l] lag-l mean
  };

  Stats finalize(double dt) const {
    const std::size_t n_bins = bins_.size();
    if (n_bins <= n_lags_)
      throw std::invalid_argument(
          "noise: trajectory window shorter than the requested maximum lag");
    const double bin_time = static_cast<double>(bin_steps_) * dt;
    const Eigen::Map<const Eigen::VectorXd> series(bins_.data(),
                                                   static_cast<long>(n_bins));
    Stats st;
    st.c1.resize(n_lags_ + 1);
    st.c0 = sum_sq_ / static_cast<double>(n_steps_) / dt;
    st.s0 = 2.0 * st.c0;
    for (std::size_t l = 0; l <= n_lags_; ++l) {
      const long pairs = static_cast<long>(n_bins - l);
      st.c1[l] =
          series.tail(pairs).dot(series.head(pairs)) / static_cast<double>(pairs);
    }
    // Remove the local spike from the zero-lag bin; the spike estimate uses
    // the steps that landed in completed bins so the split is exact.
    const double mean_sq_binned =
        sum_sq_binned_ / static_cast<double>(n_bins * bin_steps_);
    st.c1[0] -= static_cast<double>(bin_steps_) * mean_sq_binned;
    double nonlocal = st.c1[0];
    for (std::size_t l = 1; l <= n_lags_; ++l) nonlocal += 2.0 * st.c1[l];
    st.s1 = 2.0 / bin_time * nonlocal;
    return st;
  }

  std::size_t bins() const { return bins_.size(); }

 private:
  std::size_t bin_steps_;
  std::size_t n_lags_;
  std::vector<double> bins_;
  double sum_sq_ = 0.0;
  double sum_sq_binned_ = 0.0;
  double sum_sq_pending_ = 0.0;
  std::size_t n_steps_ = 0;
  double bin_acc_ = 0.0;
  std::size_t steps_in_bin_ = 0;
};

struct EnsembleSums {
  Eigen::ArrayXd c1_sum;
  double c0_sum = 0.0;
  double s0_sum = 0.0, s0_sq_sum = 0.0;
  double s1_sum = 0.0, s1_sq_sum = 0.0;
  double s0_s1_sum = 0.0;
  double flow_sum = 0.0, flow_sq_sum = 0.0;
  std::uint64_t count = 0;

  void init(std::size_t n_lags) { c1_sum = Eigen::ArrayXd::Zero(n_lags + 1); }

  void add(const TrajectoryCorrelator::Stats& st, double traj_flow) {
    c1_sum += st.c1;
    c0_sum += st.c0;
    s0_sum += st.s0;
    s0_sq_sum += st.s0 * st.s0;
    s1_sum += st.s1;
    s1_sq_sum += st.s1 * st.s1;
    s0_s1_sum += st.s0 * st.s1;
    flow_sum += traj_flow;
    flow_sq_sum += traj_flow * traj_flow;
    ++count;
  }

  void merge(const EnsembleSums& other) {
    c1_sum += other.c1_sum;
    c0_sum += other.c0_sum;
    s0_sum += other.s0_sum;
    s0_sq_sum += other.s0_sq_sum;
    s1_sum += other.s1_sum;
    s1_sq_sum += other.s1_sq_sum;
    s0_s1_sum += other.s0_s1_sum;
    flow_sum += other.flow_sum;
    flow_sq_sum += other.flow_sq_sum;
    count += other.count;
  }
};

CorrelationSeries assemble(const EnsembleSums& sums, double dt, double bin_time) {
  if (sums.count == 0) throw std::invalid_argument("noise: empty ensemble");
  const double n = static_cast<double>(sums.count);
  CorrelationSeries series;
  series.dt = dt;
  series.bin_width = bin_time;
  series.n_traj = sums.count;
  series.c0 = sums.c0_sum / n;
  series.c1 = sums.c1_sum / n;
  series.s0_mean = sums.s0_sum / n;
  series.s1_mean = sums.s1_sum / n;
  series.s0_var = std::max(0.0, sums.s0_sq_sum / n - series.s0_mean * series.s0_mean);
  series.s1_var = std::max(0.0, sums.s1_sq_sum / n - series.s1_mean * series.s1_mean);
  series.s0_s1_cov = sums.s0_s1_sum / n - series.s0_mean * series.s1_mean;
  series.flow_mean = sums.flow_sum / n;
  series.flow_var =
      std::max(0.0, sums.flow_sq_sum / n - series.flow_mean * series.flow_mean);
  return series;
}

// Feeds one trajectory into the correlator; returns its window-mean flow.
double feed_series(TrajectoryCorrelator& corr, std::span<const double> q_series,
                   double baseline, double dt, bool subtract_sample_mean) {
  double mean = 0.0;
  for (double v : q_series) mean += v;
  mean /= static_cast<double>(q_series.size());
  const double offset = subtract_sample_mean ? mean : baseline;
  corr.reset();
  for (double v : q_series) corr.add(v - offset);
  return mean / dt;
}

}  // namespace

double q_jump(const Matrix2c& rho_ss, const QubitParams& q, double theta_n) {
  return -0.5 * q.delta * (std::cos(theta_n) + sigma_z_expectation(rho_ss));
}

ExcessEnergy excess_energy(const QubitParams& q, const Rates& r,
                           const MonitorConfig& mc, double dt) {
  if (dt <= 0.0) dt = 0.01 / q.delta;
  const Liouvillian liouvillian = build_liouvillian(q, r, mc);
  const Matrix2c rho_ss = steady_state(liouvillian);
  const double flow_ss = monitor_flow(rho_ss, q, mc).total;
  const double tol = 1e-10 * std::max(std::abs(flow_ss), mc.gamma * q.delta);
  const double t_max = 50.0 / r.relax();
  const double decay = 0.5 * r.relax();  // slowest relaxation scale
  constexpr int kSettled = 8;            // consecutive in-tolerance samples

  Matrix2c rho = density(mc.feedback);
  double deviation = monitor_flow(rho, q, mc).total - flow_ss;
  double integral = 0.0;
  double t = 0.0;
  int settled = std::abs(deviation) < tol ? 1 : 0;
  while (settled < kSettled && t < t_max) {
    rho = rk4_step(rho, liouvillian, dt);
    t += dt;
    const double next = monitor_flow(rho, q, mc).total - flow_ss;
    integral += 0.5 * dt * (deviation + next);
    deviation = next;
    settled = std::abs(deviation) < tol ? settled + 1 : 0;
  }
  if (settled < kSettled) {
    std::ostringstream msg;
    msg << "excess_energy: transient not converged by t = " << t_max
        << " (|J(t)-J| = " << std::abs(deviation) << ", tail estimate "
        << std::abs(deviation) / decay << ")";
    throw std::runtime_error(msg.str());
  }
  return ExcessEnergy{integral, std::abs(deviation) / decay, t};
}

double s0_from_state(const Matrix2c& rho_ss, const QubitParams& q,
                     const MonitorConfig& mc) {
  const double rho_mm = (density(mc.measure) * rho_ss).trace().real();
  const double qj = q_jump(rho_ss, q, mc.feedback.theta);
  return 2.0 * mc.gamma * rho_mm * qj * qj;
}

double sigma_z_weak_coupling(double theta_m, double theta_n, const Rates& r,
                             double gamma) {
  const double cm = std::cos(theta_m);
  const double cn = std::cos(theta_n);
  return -(2.0 * r.net() - gamma * (cm - cn)) /
         (2.0 * r.relax() + gamma * (1.0 - cm * cn));
}

double s0_weak_coupling(double theta_m, double theta_n, const Rates& r,
                        double gamma, const QubitParams& q) {
  const double sz = sigma_z_weak_coupling(theta_m, theta_n, r, gamma);
  const double cn = std::cos(theta_n);
  const double cm = std::cos(theta_m);
  return 0.25 * gamma * q.delta * q.delta * (sz + cn) * (sz + cn) * (1.0 - sz * cm);
}

double s1_dc_closed(double gamma, double rho_mm, double q_jump_value,
                    double q_ex_value) {
  return 4.0 * gamma * rho_mm * (q_jump_value + 0.5 * q_ex_value) * q_ex_value;
}

double fano_closed(double q_jump_value, double q_ex_value) {
  if (q_jump_value == 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = 1.0 + q_ex_value / q_jump_value;
  return ratio * ratio;
}

NoiseClosedForm noise_closed_form(const QubitParams& q, const Rates& r,
                                  const MonitorConfig& mc, double dt) {
  const Matrix2c rho_ss = steady_state(build_liouvillian(q, r, mc));
  NoiseClosedForm out;
  out.rho_mm = (density(mc.measure) * rho_ss).trace().real();
  out.sigma_z = sigma_z_expectation(rho_ss);
  out.q_jump = q_jump(rho_ss, q, mc.feedback.theta);
  const ExcessEnergy ex = excess_energy(q, r, mc, dt);
  out.q_ex = ex.value;
  out.q_ex_tail = ex.tail;
  out.s0 = 2.0 * mc.gamma * out.rho_mm * out.q_jump * out.q_jump;
  out.s1 = s1_dc_closed(mc.gamma, out.rho_mm, out.q_jump, out.q_ex);
  out.fano = fano_closed(out.q_jump, out.q_ex);
  out.steady_flow = monitor_flow(rho_ss, q, mc).total;
  return out;
}

CorrelationSeries correlation_mc(std::span<const std::vector<StepRecord>> records,
                                 double steady_flow, double dt,
                                 const QubitParams& q, const Rates& r,
                                 const NoiseMcOptions& opts) {
  if (records.empty()) throw std::invalid_argument("correlation_mc: no records");
  const McGrid grid = resolve_grid(opts, q, r, dt, records.front().size());

  TrajectoryCorrelator corr(grid.bin_steps, grid.n_lags);
  EnsembleSums sums;
  sums.init(grid.n_lags);
  std::vector<double> q_series;
  for (const auto& traj : records) {
    q_series.clear();
    q_series.reserve(traj.size());
    for (const StepRecord& rec : traj) q_series.push_back(rec.q1 + rec.q2);
    const double traj_flow =
        feed_series(corr, q_series, steady_flow * dt, dt, opts.subtract_sample_mean);
    sums.add(corr.finalize(dt), traj_flow);
  }
  return assemble(sums, dt, static_cast<double>(grid.bin_steps) * dt);
}

CorrelationSeries ensemble_correlation(const TrajectoryConfig& cfg,
                                       const QubitParams& q, const Rates& r,
                                       const MonitorConfig& mc,
                                       const NoiseMcOptions& opts,
                                       unsigned n_threads) {
  validate(cfg, q, r, mc);
  const std::size_t n_eq =
      static_cast<std::size_t>(std::llround(cfg.t_equilibrate / cfg.dt));
  const std::size_t n_rec =
      static_cast<std::size_t>(std::llround(cfg.t_window / cfg.dt));
  const McGrid grid = resolve_grid(opts, q, r, cfg.dt, n_rec);

  const SmeEngine engine(q, r, mc, cfg.dt);
  const Matrix2c rho_ss = steady_state(build_liouvillian(q, r, mc));
  const Vector4d v0 = SmeEngine::to_real(rho_ss);
  const double flow_ss = monitor_flow(rho_ss, q, mc).total;

  const std::size_t n_blocks = (cfg.n_traj + kTrajPerBlock - 1) / kTrajPerBlock;
  std::vector<EnsembleSums> blocks(n_blocks);

  parallel_blocks(n_blocks, n_threads, [&](std::size_t block) {
    EnsembleSums sums;
    sums.init(grid.n_lags);
    TrajectoryCorrelator corr(grid.bin_steps, grid.n_lags);
    std::vector<double> q_series(n_rec);
    const std::uint64_t begin = block * kTrajPerBlock;
    const std::uint64_t end =
        std::min<std::uint64_t>(begin + kTrajPerBlock, cfg.n_traj);
    for (std::uint64_t traj = begin; traj < end; ++traj) {
      engine.run(cfg.master_seed, traj, v0, n_eq, n_rec,
                 [&](std::size_t k, const StepRecord& rec, const Vector4d&) {
                   q_series[k] = rec.q1 + rec.q2;
                 });
      const double traj_flow = feed_series(corr, q_series, flow_ss * cfg.dt,
                                           cfg.dt, opts.subtract_sample_mean);
      sums.add(corr.finalize(cfg.dt), traj_flow);
    }
    blocks[block] = std::move(sums);
  });

  EnsembleSums total;
  total.init(grid.n_lags);
  for (const EnsembleSums& b : blocks) total.merge(b);
  return assemble(total, cfg.dt, static_cast<double>(grid.bin_steps) * cfg.dt);
}

SpectrumResult spectrum_mc(const CorrelationSeries& series,
                           const std::vector<double>& omegas) {
  SpectrumResult out;
  out.omega = omegas;
  out.s1.reserve(omegas.size());
  const std::ptrdiff_t n_lags = series.c1.size() - 1;
  for (double w : omegas) {
    double sum = series.c1[0];
    for (std::ptrdiff_t l = 1; l <= n_lags; ++l)
      sum += 2.0 * std::cos(w * static_cast<double>(l) * series.bin_width) *
             series.c1[l];
    out.s1.push_back(2.0 / series.bin_width * sum);
  }

  const double n = static_cast<double>(series.n_traj);
  NoiseEstimate& dc = out.dc;
  dc.n_traj = series.n_traj;
  dc.s0 = series.s0_mean;
  dc.s1_dc = series.s1_mean;
  dc.s0_stderr = std::sqrt(series.s0_var / n);
  dc.s1_stderr = std::sqrt(series.s1_var / n);
  if (dc.s0 > 0.0) {
    dc.fano = (dc.s0 + dc.s1_dc) / dc.s0;
    // var F, F = 1 + S1/S0, from the per-trajectory covariance.
    const double d_s1 = 1.0 / dc.s0;
    const double d_s0 = -dc.s1_dc / (dc.s0 * dc.s0);
    const double var_f = (d_s1 * d_s1 * series.s1_var + d_s0 * d_s0 * series.s0_var +
                          2.0 * d_s1 * d_s0 * series.s0_s1_cov) /
                         n;
    dc.fano_stderr = std::sqrt(std::max(0.0, var_f));
  }
  return out;
}

}  // namespace qmf
