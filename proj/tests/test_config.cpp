#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qmf/cli.hpp"
#include "qmf/config.hpp"
#include "qmf/csv.hpp"

using namespace qmf;

namespace {

const char* kFig2Config = R"(# steady-flow reproduction
[physics]
delta = 1.0
gamma_plus = 0.1
gamma_minus = 0.05

[monitor]
gamma = 0.1
theta_m = 0.25
theta_n = 0.75

[sweep]
theta_m = 0:1:11
theta_n = 0:1:11

[output]
path = out.csv
)";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal rate-driven config parses to the expected physics") {
  const RunConfig cfg = parse_config(kFig2Config);
  CHECK(cfg.qubit.delta == 1.0);
  REQUIRE(cfg.rates.has_value());
  CHECK(cfg.rates->emission == doctest::Approx(0.1));
  CHECK(cfg.rates->absorption == doctest::Approx(0.05));
  CHECK(cfg.monitor.gamma == doctest::Approx(0.1));
  CHECK(cfg.monitor.measure.theta == doctest::Approx(0.25 * kPi));
  CHECK(cfg.monitor.feedback.theta == doctest::Approx(0.75 * kPi));
  CHECK(cfg.sweep_theta_m.size() == 11);
  CHECK(cfg.sweep_theta_m.front() == doctest::Approx(0.0));
  CHECK(cfg.sweep_theta_m.back() == doctest::Approx(kPi));
  CHECK(cfg.output_path == "out.csv");
  const Rates r = cfg.resolved_rates();
  CHECK(r.emission == doctest::Approx(0.1));
}

TEST_CASE("bath-driven config resolves rates through the Ohmic formulas") {
  const char* text = R"(
[physics]
bath = 1.5 0.01
bath = 1.0 0.01
omega_c = 1000

[monitor]
gamma = 0.01
)";
  const RunConfig cfg = parse_config(text);
  REQUIRE(cfg.baths.has_value());
  CHECK(cfg.baths->baths.size() == 2);
  CHECK(cfg.per_bath_rates().size() == 2);
  const Rates r = cfg.resolved_rates();
  CHECK(r.emission > r.absorption);
  CHECK(r.absorption > 0.0);
  const TrajectoryConfig tcfg = cfg.resolved_trajectory();
  CHECK(tcfg.t_equilibrate == doctest::Approx(10.0 / r.relax()));
  CHECK(tcfg.t_window == doctest::Approx(50.0 / r.relax()));
}

TEST_CASE("config errors carry context") {
  SUBCASE("missing physics section") {
    CHECK_THROWS_WITH_AS(parse_config("[monitor]\ngamma = 0.1\n"),
                         doctest::Contains("[physics]"), std::invalid_argument);
  }
  SUBCASE("both rates and baths") {
    const char* text = R"(
[physics]
gamma_plus = 0.1
gamma_minus = 0.05
bath = 1.0 0.01

[monitor]
gamma = 0.1
)";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("not both"),
                         std::invalid_argument);
  }
  SUBCASE("unknown key with line number") {
    const char* text =
        "[physics]\ngamma_plus = 0.1\ngamma_minus = 0.05\nbogus = 1\n"
        "[monitor]\ngamma = 0\n";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("config:4"),
                         std::invalid_argument);
  }
  SUBCASE("malformed number with line number") {
    const char* text = "[physics]\ngamma_plus = abc\n";
    CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("config:2"),
                         std::invalid_argument);
  }
  SUBCASE("missing rates entirely") {
    CHECK_THROWS_AS(parse_config("[physics]\ndelta = 1\n[monitor]\ngamma = 0\n"),
                    std::invalid_argument);
  }
}

TEST_CASE("grid specs") {
  const char* text = R"(
[physics]
gamma_plus = 0.1
gamma_minus = 0.05

[monitor]
gamma = 0.1

[sweep]
theta_m = 0.1,0.5,0.9
theta_n = 0.5:0.5:1
diagonal = true
)";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.sweep_theta_m.size() == 3);
  CHECK(cfg.sweep_theta_m[1] == doctest::Approx(0.5 * kPi));
  CHECK(cfg.sweep_theta_n.size() == 1);
  CHECK(cfg.diagonal);
}

TEST_CASE("csv formatting is stable") {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.metadata("seed", std::uint64_t{42});
  csv.header({"a", "b"});
  csv.row({1.0, 0.123456789012345});
  CHECK(out.str() == "# seed = 42\na,b\n1,0.123456789012\n");
}

TEST_CASE("fnv hash is stable") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ULL);
  CHECK(fnv1a64("a") != fnv1a64("b"));
}

TEST_CASE("sweep-flow command writes deterministic CSV across thread counts") {
  RunConfig cfg = parse_config(kFig2Config);
  cfg.sweep_theta_m = {0.0, 0.5 * kPi, kPi};
  cfg.sweep_theta_n = {0.0, 0.5 * kPi, kPi};

  cli::Options opts_a;
  opts_a.threads = 1;
  opts_a.out = "/tmp/qmf_test_sweep_a.csv";
  cli::Options opts_b;
  opts_b.threads = 3;
  opts_b.out = "/tmp/qmf_test_sweep_b.csv";
  REQUIRE(cli::run_sweep_flow(cfg, opts_a) == 0);
  REQUIRE(cli::run_sweep_flow(cfg, opts_b) == 0);
  const std::string a = read_file("/tmp/qmf_test_sweep_a.csv");
  const std::string b = read_file("/tmp/qmf_test_sweep_b.csv");
  CHECK(!a.empty());
  CHECK(a == b);
  CHECK(a.find("J_numeric") != std::string::npos);
  std::remove("/tmp/qmf_test_sweep_a.csv");
  std::remove("/tmp/qmf_test_sweep_b.csv");
}

TEST_CASE("noise command emits the pinned column set") {
  const char* text = R"(
[physics]
gamma_plus = 0.3
gamma_minus = 0.15

[monitor]
gamma = 0.01

[sweep]
theta_m = 0.3,0.5
diagonal = true

[trajectory]
n_traj = 0
)";
  RunConfig cfg = parse_config(text);
  cli::Options opts;
  opts.out = "/tmp/qmf_test_noise.csv";
  REQUIRE(cli::run_noise(cfg, opts) == 0);
  const std::string contents = read_file("/tmp/qmf_test_noise.csv");
  CHECK(contents.find(
            "theta_m,theta_n,S0_analytic,S0_mc,S0_stderr,S1_analytic,S1_mc,"
            "S1_stderr,fano_analytic,fano_mc,q_jump,q_ex") != std::string::npos);
  CHECK(contents.find("nan") != std::string::npos);  // MC columns absent
  CHECK(contents.find("qex_tail_bound_max") != std::string::npos);
  std::remove("/tmp/qmf_test_noise.csv");
}

TEST_CASE("spectrum command emits finite-frequency rows") {
  const char* text = R"(
[physics]
gamma_plus = 0.3
gamma_minus = 0.15

[monitor]
gamma = 0.01
theta_m = 0.55
theta_n = 0.55

[trajectory]
n_traj = 300
dt = 0.01

[sweep]
omega = 0:2:9
)";
  RunConfig cfg = parse_config(text);
  cli::Options opts;
  opts.threads = 2;
  opts.out = "/tmp/qmf_test_spectrum.csv";
  REQUIRE(cli::run_spectrum(cfg, opts) == 0);
  const std::string contents = read_file("/tmp/qmf_test_spectrum.csv");
  CHECK(contents.find("omega,S1,S_total") != std::string::npos);
  CHECK(contents.find("# S0 = ") != std::string::npos);
  // 9 omega rows follow the header.
  std::size_t rows = 0;
  for (std::size_t pos = contents.find('\n'); pos != std::string::npos;
       pos = contents.find('\n', pos + 1))
    ++rows;
  CHECK(rows >= 10);
  std::remove("/tmp/qmf_test_spectrum.csv");
}

TEST_CASE("trajectory dump uses the documented columns") {
  const char* text = R"(
[physics]
gamma_plus = 0.3
gamma_minus = 0.15

[monitor]
gamma = 0.01
theta_m = 0.35
theta_n = 0.35

[trajectory]
n_traj = 2
dt = 0.01
)";
  RunConfig cfg = parse_config(text);
  cli::Options opts;
  opts.out = "/tmp/qmf_test_traj.csv";
  REQUIRE(cli::run_trajectory_dump(cfg, opts) == 0);
  const std::string contents = read_file("/tmp/qmf_test_traj.csv");
  CHECK(contents.find("step,jumped,q1,q2") != std::string::npos);
  CHECK(contents.find("# trajectory 0") != std::string::npos);
  CHECK(contents.find("# trajectory 1") != std::string::npos);
  std::remove("/tmp/qmf_test_traj.csv");
}
