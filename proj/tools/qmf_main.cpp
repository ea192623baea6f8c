// Command-line front end: steady-state and sweep calculations, trajectory
// and noise campaigns, and the validation suite.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qmf/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n_traj;
  unsigned threads = 0;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* config = cmd->add_option("--config", args.config_path,
                                 "run configuration file (INI-style sections)");
  if (config_required) config->required();
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.seed = v; },
      "master seed override");
  cmd->add_option_function<std::uint64_t>(
      "--traj", [&args](std::uint64_t v) { args.n_traj = v; },
      "trajectory count override");
  cmd->add_option("--threads", args.threads,
                  "worker threads (default: QMF_THREADS env or hardware)");
  cmd->add_option_function<std::string>(
      "--out", [&args](const std::string& v) { args.out = v; },
      "output CSV path override ('-' for stdout)");
}

qmf::cli::Options to_options(const CommonArgs& args) {
  qmf::cli::Options opts;
  opts.seed = args.seed;
  opts.n_traj = args.n_traj;
  opts.threads = args.threads;
  opts.out = args.out;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "qmf: dissipative qubit under continuous measurement and feedback --\n"
      "steady-state energy flows, quantum-jump trajectories, and noise "
      "spectra.\nAngles in configs and CSVs are in units of pi; energies and "
      "rates in units\nof the qubit splitting delta (default 1)."};
  app.require_subcommand(1);

  CommonArgs steady, sweep, cooling, trajectory, noise, spectrum, validate;

  add_common(app.add_subcommand("steady", "steady state and flows at one setting"),
             steady);
  add_common(app.add_subcommand(
                 "sweep-flow", "steady-state flow over the (theta_m, theta_n) grid"),
             sweep);
  add_common(app.add_subcommand(
                 "cooling", "heat currents and COP over the grid (two baths)"),
             cooling);
  add_common(app.add_subcommand("trajectory", "dump stochastic step records"),
             trajectory);
  add_common(app.add_subcommand(
                 "noise", "Poisson/backaction noise and Fano factor over the grid"),
             noise);
  add_common(app.add_subcommand("spectrum", "finite-frequency noise spectrum"),
             spectrum);
  add_common(app.add_subcommand("validate", "run the pinned invariant suite"),
             validate, /*config_required=*/false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("steady"))
      return qmf::cli::run_steady(qmf::load_config(steady.config_path),
                                  to_options(steady));
    if (app.got_subcommand("sweep-flow"))
      return qmf::cli::run_sweep_flow(qmf::load_config(sweep.config_path),
                                      to_options(sweep));
    if (app.got_subcommand("cooling"))
      return qmf::cli::run_cooling(qmf::load_config(cooling.config_path),
                                   to_options(cooling));
    if (app.got_subcommand("trajectory"))
      return qmf::cli::run_trajectory_dump(qmf::load_config(trajectory.config_path),
                                           to_options(trajectory));
    if (app.got_subcommand("noise"))
      return qmf::cli::run_noise(qmf::load_config(noise.config_path),
                                 to_options(noise));
    if (app.got_subcommand("spectrum"))
      return qmf::cli::run_spectrum(qmf::load_config(spectrum.config_path),
                                    to_options(spectrum));
    if (app.got_subcommand("validate"))
      return qmf::cli::run_validate(to_options(validate));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
