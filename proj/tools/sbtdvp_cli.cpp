// Command-line driver: run, sweep, compare, oracle-check.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbtdvp/driver.hpp"
#include "sbtdvp/run_config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kFieldFlags = {
    {"--s", "s"},
    {"--alpha", "alpha"},
    {"--omega-c", "omega_c"},
    {"--n-modes", "n_modes"},
    {"--omega-max", "omega_max"},
    {"--delta", "delta"},
    {"--initial-condition", "initial_condition"},
    {"--dt", "dt"},
    {"--t-max", "t_max"},
    {"--record-every", "record_every"},
    {"--epsilon-amp", "epsilon_amp"},
    {"--norm-tolerance", "norm_tolerance"},
    {"--compute-sigma", "compute_sigma"},
    {"--sigma-average", "sigma_average"},
    {"--output", "output"},
};

struct ConfigOptions {
  std::string config_file;
  std::vector<std::string> assignments;
  bool full_scale = false;
  std::map<std::string, std::string> fields;
};

void add_config_options(CLI::App* app, ConfigOptions& opts) {
  app->add_option("-c,--config", opts.config_file, "key = value config file");
  app->add_option("--set", opts.assignments, "override as key=value (repeatable)");
  app->add_flag("--full-scale", opts.full_scale, "use 20000 bath modes");
  for (const auto& [flag, key] : kFieldFlags) {
    app->add_option(flag, opts.fields[key], "config key " + key);
  }
}

sbtdvp::RunConfig build_config(const ConfigOptions& opts) {
  sbtdvp::RunConfig cfg;
  if (!opts.config_file.empty()) cfg = sbtdvp::load_config(opts.config_file);
  if (opts.full_scale) cfg.n_modes = sbtdvp::kFullScaleModes;
  for (const auto& [key, value] : opts.fields) {
    if (!value.empty()) sbtdvp::apply_setting(cfg, key, value);
  }
  for (const std::string& kv : opts.assignments) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw sbtdvp::ConfigError("--set expects key=value, got " + kv);
    sbtdvp::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void print_warning(std::string_view w) { std::cerr << "warning: " << w << '\n'; }

int cmd_run(const ConfigOptions& opts, bool force) {
  const sbtdvp::RunConfig cfg = build_config(opts);
  sbtdvp::TrajectoryCallbacks callbacks;
  callbacks.on_warning = print_warning;
  if (!force) {
    for (const auto& p : {std::filesystem::path(cfg.output_path), sbtdvp::sidecar_path(cfg.output_path)}) {
      if (std::filesystem::exists(p)) {
        throw sbtdvp::ConfigError("refusing to overwrite " + p.string() + " (pass --force)");
      }
    }
  }
  const sbtdvp::RunOutcome outcome = sbtdvp::execute(cfg, callbacks);
  sbtdvp::write_outputs(outcome, force);
  std::cout << "wrote " << cfg.output_path << " (" << outcome.trajectory.records.size()
            << " records, " << outcome.wall_seconds << " s)\n";
  return 0;
}

int cmd_sweep(const ConfigOptions& opts, const std::string& parameter,
              const std::vector<double>& values, const std::string& out_dir, bool force) {
  const sbtdvp::RunConfig base = build_config(opts);
  const auto param = sbtdvp::parse_sweep_parameter(parameter);
  const auto rows = sbtdvp::sweep(base, param, values, out_dir, force);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path summary = std::filesystem::path(out_dir) / "summary.csv";
  if (!force && std::filesystem::exists(summary)) {
    throw sbtdvp::ConfigError("refusing to overwrite " + summary.string() + " (pass --force)");
  }
  std::ofstream out(summary, std::ios::binary | std::ios::trunc);
  sbtdvp::write_sweep_summary(out, param, rows);
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.ok) {
      ++failed;
      std::cerr << "run " << r.value << " failed: " << r.error << '\n';
    }
  }
  std::cout << "wrote " << summary.string() << " (" << rows.size() << " runs, " << failed
            << " failed)\n";
  return 0;
}

int cmd_compare(const ConfigOptions& opts, const std::string& output, bool force) {
  sbtdvp::RunConfig a = build_config(opts);
  sbtdvp::RunConfig b = a;
  a.initial_condition = sbtdvp::InitialCondition::factorized;
  b.initial_condition = sbtdvp::InitialCondition::polarized;
  if (!force && std::filesystem::exists(output)) {
    throw sbtdvp::ConfigError("refusing to overwrite " + output + " (pass --force)");
  }
  const auto cmp = sbtdvp::compare_initial_conditions(a, b);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  sbtdvp::write_comparison(out, cmp);
  std::cout << "max |dP_z| = " << cmp.difference.max_abs
            << ", integrated |dP_z| = " << cmp.difference.integrated_abs
            << ", steady P_z factorized = " << cmp.steady_factorized
            << ", polarized = " << cmp.steady_polarized << '\n';
  return 0;
}

int cmd_oracle(const sbtdvp::OracleCheckConfig& cfg) {
  const auto report = sbtdvp::oracle_check(cfg);
  std::cout << "modes = " << cfg.n_modes << ", n_max = " << cfg.n_max << ", delta = " << cfg.delta
            << ", alpha = " << cfg.spectral.alpha << ", s = " << cfg.spectral.s << '\n';
  std::cout << "max |P_z(variational) - P_z(exact)| = " << report.max_p_z_error << '\n';
  std::cout << "max |S(variational) - S(exact)|     = " << report.max_entropy_error << '\n';
  std::cout << "closed-form vs Fock <delta|delta>: max relative error " << report.max_deviation_rel_error
            << " over " << report.deviation_samples << " samples\n";
  std::cout << "max displacement = " << report.max_displacement
            << ", truncation defect = " << report.truncation_defect << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational (Davydov D1) dynamics of the sub-Ohmic spin-boson model"};
  app.require_subcommand(1);

  ConfigOptions run_opts;
  bool run_force = false;
  auto* run = app.add_subcommand("run", "integrate one trajectory and write its table");
  add_config_options(run, run_opts);
  run->add_flag("--force", run_force, "overwrite existing outputs");

  ConfigOptions sweep_opts;
  std::string sweep_param;
  std::vector<double> sweep_values;
  std::string sweep_dir = "sweep";
  bool sweep_force = false;
  auto* sweep = app.add_subcommand("sweep", "run a family of trajectories over one parameter");
  add_config_options(sweep, sweep_opts);
  sweep->add_option("--parameter", sweep_param, "alpha, s or delta")->required();
  sweep->add_option("--values", sweep_values, "parameter values")->expected(0, -1);
  sweep->add_option("--out-dir", sweep_dir, "directory for tables and summary.csv");
  sweep->add_flag("--force", sweep_force, "overwrite existing outputs");

  ConfigOptions cmp_opts;
  std::string cmp_output = "compare.csv";
  bool cmp_force = false;
  auto* compare = app.add_subcommand("compare", "factorized vs polarized bath at otherwise equal settings");
  add_config_options(compare, cmp_opts);
  compare->add_option("--table", cmp_output, "joined output table");
  compare->add_flag("--force", cmp_force, "overwrite existing output");

  sbtdvp::OracleCheckConfig ocfg;
  std::string ocfg_ic = "factorized";
  auto* oracle = app.add_subcommand("oracle-check", "compare against exact small-bath propagation");
  oracle->add_option("--s", ocfg.spectral.s);
  oracle->add_option("--alpha", ocfg.spectral.alpha);
  oracle->add_option("--delta", ocfg.delta);
  oracle->add_option("--n-modes", ocfg.n_modes);
  oracle->add_option("--omega-max", ocfg.omega_max);
  oracle->add_option("--n-max", ocfg.n_max, "photon cutoff per mode");
  oracle->add_option("--t-max", ocfg.t_max);
  oracle->add_option("--dt", ocfg.dt);
  oracle->add_option("--sample-every", ocfg.sample_every);
  oracle->add_option("--initial-condition", ocfg_ic);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts, run_force);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_param, sweep_values, sweep_dir, sweep_force);
    if (*compare) return cmd_compare(cmp_opts, cmp_output, cmp_force);
    if (*oracle) {
      ocfg.initial_condition = sbtdvp::parse_initial_condition(ocfg_ic);
      return cmd_oracle(ocfg);
    }
  } catch (const sbtdvp::NumericalFailure& e) {
    std::cerr << "numerical failure at t = " << e.time() << ": " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::logic_error& e) {
    // ConfigError and other argument errors derive from std::invalid_argument.
    if (dynamic_cast<const std::invalid_argument*>(&e) != nullptr) {
      std::cerr << "config error: " << e.what() << '\n';
      return kExitConfig;
    }
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
