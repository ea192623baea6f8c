#pragma once

// Command implementations behind the qmf tool.  They are plain functions so
// the acceptance suite can drive them directly; the binary is a thin
// argument-parsing wrapper.

#include <cstdint>
#include <optional>
#include <string>

#include "qmf/config.hpp"

namespace qmf::cli {

struct Options {
  std::optional<std::uint64_t> seed;    // overrides [trajectory] seed
  std::optional<std::uint64_t> n_traj;  // overrides [trajectory] n_traj
  unsigned threads = 0;                 // 0 -> default_thread_count()
  std::optional<std::string> out;       // overrides [output] path; "-" = stdout
};

int run_steady(RunConfig cfg, const Options& opts);
int run_sweep_flow(RunConfig cfg, const Options& opts);
int run_cooling(RunConfig cfg, const Options& opts);
int run_trajectory_dump(RunConfig cfg, const Options& opts);
int run_noise(RunConfig cfg, const Options& opts);
int run_spectrum(RunConfig cfg, const Options& opts);

// Pinned invariant suite across all modules; exit code 0 iff every check
// passes.  The optional output path receives a machine-readable CSV report.
int run_validate(const Options& opts);

}  // namespace qmf::cli
