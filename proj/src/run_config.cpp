#include "sbtdvp/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace sbtdvp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is not available on every libstdc++ we target.
  const std::string text(value);
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(x)) {
    throw ConfigError("config key '" + std::string(key) + "': '" + text + "' is not a number");
  }
  return x;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                      "' is not a non-negative integer");
  }
  return n;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) +
                    "' is not a boolean");
}

std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  try {
    spectral.validate();
    if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
    if (!(omega_max > 0.0)) throw ConfigError("omega_max must be > 0");
    if (!(delta > 0.0)) throw ConfigError("delta must be > 0");
    const double dw = omega_max / static_cast<double>(n_modes);
    const double recurrence = 2.0 * std::numbers::pi / dw;
    if (!(integrator.t_max < recurrence)) {
      std::ostringstream msg;
      msg << "t_max = " << integrator.t_max << " must stay below the recurrence time "
          << recurrence;
      throw ConfigError(msg.str());
    }
    if (!(integrator.dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(integrator.dt * omega_max < 0.5)) throw ConfigError("dt * omega_max must be < 0.5");
    if (!(integrator.t_max > 0.0)) throw ConfigError("t_max must be > 0");
    if (integrator.record_every < 1) throw ConfigError("record_every must be >= 1");
    if (!(integrator.epsilon_amp >= 0.0)) throw ConfigError("epsilon_amp must be >= 0");
    if (!(integrator.norm_tolerance > 0.0)) throw ConfigError("norm_tolerance must be > 0");
    if (output_path.empty()) throw ConfigError("output path must not be empty");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

DiscreteBath RunConfig::make_bath() const {
  validate();
  return DiscreteBath(spectral, n_modes, omega_max);
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "s") {
    c.spectral.s = parse_double(key, value);
  } else if (key == "alpha") {
    c.spectral.alpha = parse_double(key, value);
  } else if (key == "omega_c") {
    c.spectral.omega_c = parse_double(key, value);
  } else if (key == "n_modes") {
    c.n_modes = parse_count(key, value);
  } else if (key == "omega_max") {
    c.omega_max = parse_double(key, value);
  } else if (key == "delta") {
    c.delta = parse_double(key, value);
  } else if (key == "initial_condition") {
    try {
      c.initial_condition = parse_initial_condition(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "dt") {
    c.integrator.dt = parse_double(key, value);
  } else if (key == "t_max") {
    c.integrator.t_max = parse_double(key, value);
  } else if (key == "record_every") {
    c.integrator.record_every = parse_count(key, value);
  } else if (key == "epsilon_amp") {
    c.integrator.epsilon_amp = parse_double(key, value);
  } else if (key == "norm_tolerance") {
    c.integrator.norm_tolerance = parse_double(key, value);
  } else if (key == "compute_sigma") {
    c.integrator.compute_sigma = parse_bool(key, value);
  } else if (key == "sigma_average") {
    if (value == "full") {
      c.integrator.bath_average = BathAverage::full_interval;
    } else if (value == "running") {
      c.integrator.bath_average = BathAverage::running;
    } else {
      throw ConfigError("sigma_average must be 'full' or 'running'");
    }
  } else if (key == "output") {
    c.output_path = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> settings(const RunConfig& c) {
  return {
      {"s", exact(c.spectral.s)},
      {"alpha", exact(c.spectral.alpha)},
      {"omega_c", exact(c.spectral.omega_c)},
      {"n_modes", std::to_string(c.n_modes)},
      {"omega_max", exact(c.omega_max)},
      {"delta", exact(c.delta)},
      {"initial_condition", std::string(to_string(c.initial_condition))},
      {"dt", exact(c.integrator.dt)},
      {"t_max", exact(c.integrator.t_max)},
      {"record_every", std::to_string(c.integrator.record_every)},
      {"epsilon_amp", exact(c.integrator.epsilon_amp)},
      {"norm_tolerance", exact(c.integrator.norm_tolerance)},
      {"compute_sigma", c.integrator.compute_sigma ? "true" : "false"},
      {"sigma_average",
       c.integrator.bath_average == BathAverage::full_interval ? "full" : "running"},
      {"output", c.output_path},
  };
}

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& [key, value] : settings(config)) out << key << " = " << value << '\n';
}

}  // namespace sbtdvp
