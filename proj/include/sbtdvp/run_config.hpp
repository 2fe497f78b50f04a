#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbtdvp/bath.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/state.hpp"

namespace sbtdvp {

/// Bad configuration input. Maps to exit code 2 in the CLI.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kDeskScaleModes = 2000;
inline constexpr std::size_t kFullScaleModes = 20000;

/// Everything needed to reproduce one trajectory. Physical quantities are in units of omega_c.
struct RunConfig {
  SpectralParams spectral{};
  std::size_t n_modes = kDeskScaleModes;
  double omega_max = 4.0;
  double delta = 0.1;
  InitialCondition initial_condition = InitialCondition::factorized;
  IntegratorConfig integrator{};
  std::string output_path = "run.csv";

  /// Throws ConfigError. Also rejects t_max at or beyond the bath recurrence time.
  void validate() const;
  DiscreteBath make_bath() const;
};

/// Sets one key from the flat config vocabulary:
///   s alpha omega_c n_modes omega_max delta initial_condition dt t_max
///   record_every epsilon_amp norm_tolerance compute_sigma sigma_average output
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment. Unknown keys are errors.
RunConfig parse_config(std::istream& in, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Full key/value listing, exact enough (17 significant digits) to rebuild the config.
std::vector<std::pair<std::string, std::string>> settings(const RunConfig& config);

void write_config(std::ostream& out, const RunConfig& config);

}  // namespace sbtdvp
