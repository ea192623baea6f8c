#include "qmf/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmf {

namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  std::ostringstream msg;
  msg << "config:" << line << ": " << what;
  throw std::invalid_argument(msg.str());
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const std::invalid_argument&) {
    fail(line, "expected a number, got '" + v + "'");
  } catch (const std::out_of_range&) {
    fail(line, "number out of range: '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) fail(line, "trailing characters in integer '" + v + "'");
    return x;
  } catch (const std::exception&) {
    fail(line, "expected a nonnegative integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(line, "expected a boolean, got '" + v + "'");
}

// Grid values: "a:b:n" (n points, endpoints inclusive), a comma list, or a
// single number.
std::vector<double> parse_grid(const std::string& v, int line) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    std::istringstream ss(v);
    std::string a, b, n;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
      fail(line, "grid must be start:stop:count");
    const double start = parse_double(trim(a), line);
    const double stop = parse_double(trim(b), line);
    const std::uint64_t count = parse_u64(trim(n), line);
    if (count == 0) fail(line, "grid count must be >= 1");
    if (count == 1) {
      out.push_back(start);
    } else {
      for (std::uint64_t i = 0; i < count; ++i)
        out.push_back(start + (stop - start) * static_cast<double>(i) /
                                  static_cast<double>(count - 1));
    }
    return out;
  }
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line));
  if (out.empty()) fail(line, "empty grid");
  return out;
}

std::vector<double> radians(const std::vector<double>& in_pi_units) {
  std::vector<double> out;
  out.reserve(in_pi_units.size());
  for (double v : in_pi_units) out.push_back(v * kPi);
  return out;
}

}  // namespace

Rates RunConfig::resolved_rates() const {
  if (rates) return *rates;
  return rates_from_baths(*baths, qubit);
}

std::vector<Rates> RunConfig::per_bath_rates() const {
  if (rates) return {*rates};
  std::vector<Rates> out;
  for (const Bath& b : baths->baths) out.push_back(bath_rates(b, baths->cutoff, qubit));
  return out;
}

TrajectoryConfig RunConfig::resolved_trajectory() const {
  TrajectoryConfig cfg = trajectory;
  const double relax = resolved_rates().relax();
  if (cfg.t_equilibrate <= 0.0) cfg.t_equilibrate = 10.0 / relax;
  if (cfg.t_window <= 0.0) cfg.t_window = 50.0 / relax;
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.raw_text = text;
  cfg.trajectory.n_traj = 100000;
  cfg.trajectory.master_seed = 1;

  bool seen_physics = false, seen_monitor = false;
  bool has_gamma_plus = false, has_gamma_minus = false;
  double gamma_plus = 0.0, gamma_minus = 0.0;
  std::vector<Bath> baths;
  double cutoff = 1000.0;
  double theta_m = 0.0, phi_m = 0.0, theta_n = 0.0, phi_n = 0.0, gamma = 0.0;

  std::istringstream stream(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(stream, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
      section = s.substr(1, s.size() - 2);
      if (section != "physics" && section != "monitor" && section != "trajectory" &&
          section != "sweep" && section != "output")
        fail(line, "unknown section [" + section + "]");
      if (section == "physics") seen_physics = true;
      if (section == "monitor") seen_monitor = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(line, "key '" + key + "' outside any section");
    if (value.empty()) fail(line, "empty value for '" + key + "'");

    if (section == "physics") {
      if (key == "delta") {
        cfg.qubit = QubitParams(parse_double(value, line));
      } else if (key == "gamma_plus") {
        gamma_plus = parse_double(value, line);
        has_gamma_plus = true;
      } else if (key == "gamma_minus") {
        gamma_minus = parse_double(value, line);
        has_gamma_minus = true;
      } else if (key == "bath") {
        std::istringstream bs(value);
        Bath bath;
        if (!(bs >> bath.temperature >> bath.coupling))
          fail(line, "bath needs 'temperature coupling'");
        std::string rest;
        if (bs >> rest) fail(line, "trailing characters in bath spec");
        baths.push_back(bath);
      } else if (key == "omega_c") {
        cutoff = parse_double(value, line);
      } else {
        fail(line, "unknown key '" + key + "' in [physics]");
      }
    } else if (section == "monitor") {
      if (key == "gamma") {
        gamma = parse_double(value, line);
      } else if (key == "theta_m") {
        theta_m = parse_double(value, line) * kPi;
      } else if (key == "phi_m") {
        phi_m = parse_double(value, line) * kPi;
      } else if (key == "theta_n") {
        theta_n = parse_double(value, line) * kPi;
      } else if (key == "phi_n") {
        phi_n = parse_double(value, line) * kPi;
      } else {
        fail(line, "unknown key '" + key + "' in [monitor]");
      }
    } else if (section == "trajectory") {
      if (key == "dt") {
        cfg.trajectory.dt = parse_double(value, line);
      } else if (key == "t_equilibrate") {
        cfg.trajectory.t_equilibrate = parse_double(value, line);
      } else if (key == "t_window") {
        cfg.trajectory.t_window = parse_double(value, line);
      } else if (key == "n_traj") {
        cfg.trajectory.n_traj = parse_u64(value, line);
      } else if (key == "seed") {
        cfg.trajectory.master_seed = parse_u64(value, line);
      } else if (key == "bin_width") {
        cfg.noise.bin_width = parse_double(value, line);
      } else if (key == "max_lag") {
        cfg.noise.max_lag = parse_double(value, line);
      } else if (key == "subtract_sample_mean") {
        cfg.noise.subtract_sample_mean = parse_bool(value, line);
      } else {
        fail(line, "unknown key '" + key + "' in [trajectory]");
      }
    } else if (section == "sweep") {
      if (key == "theta_m") {
        cfg.sweep_theta_m = radians(parse_grid(value, line));
      } else if (key == "theta_n") {
        cfg.sweep_theta_n = radians(parse_grid(value, line));
      } else if (key == "diagonal") {
        cfg.diagonal = parse_bool(value, line);
      } else if (key == "omega") {
        cfg.sweep_omega = parse_grid(value, line);
      } else {
        fail(line, "unknown key '" + key + "' in [sweep]");
      }
    } else {  // output
      if (key == "path") {
        cfg.output_path = value;
      } else {
        fail(line, "unknown key '" + key + "' in [output]");
      }
    }
  }

  if (!seen_physics) throw std::invalid_argument("config: missing [physics] section");
  if (!seen_monitor) throw std::invalid_argument("config: missing [monitor] section");

  const bool has_rates = has_gamma_plus || has_gamma_minus;
  if (has_rates && !baths.empty())
    throw std::invalid_argument(
        "config: [physics] must provide either gamma_plus/gamma_minus or bath "
        "lines, not both");
  if (!has_rates && baths.empty())
    throw std::invalid_argument(
        "config: [physics] needs gamma_plus/gamma_minus or at least one bath");
  if (has_rates) {
    if (!has_gamma_plus || !has_gamma_minus)
      throw std::invalid_argument("config: need both gamma_plus and gamma_minus");
    if (gamma_plus < 0.0 || gamma_minus < 0.0)
      throw std::invalid_argument("config: rates must be nonnegative");
    cfg.rates = Rates{gamma_plus, gamma_minus};
  } else {
    cfg.baths = BathSpec{baths, cutoff};
    rates_from_baths(*cfg.baths, cfg.qubit);  // validates bath entries
  }
  cfg.monitor = MonitorConfig(gamma, BlochState(theta_m, phi_m), BlochState(theta_n, phi_n));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace qmf
