#include "sbtdvp/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sbtdvp/deviation.hpp"
#include "sbtdvp/oracle.hpp"

namespace sbtdvp {

namespace {

std::string sci(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string short_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

template <class F>
std::vector<double> column(std::span<const ObservableRecord> records, F get) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(get(r));
  return out;
}

}  // namespace

RunOutcome execute(const RunConfig& config, const TrajectoryCallbacks& callbacks) {
  config.validate();
  const DiscreteBath bath = config.make_bath();

  RunOutcome outcome;
  outcome.config = config;
  outcome.recurrence_time = bath.recurrence_time();
  outcome.reorganization_energy = reorganization_energy(config.spectral);
  outcome.discrete_reorganization_energy = bath.reorganization_energy();

  const auto start = std::chrono::steady_clock::now();
  outcome.trajectory = integrate(init_state(config.initial_condition, bath), bath, config.delta,
                                 config.integrator, callbacks);
  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

void write_table(std::ostream& out, const RunOutcome& outcome) {
  out << "# sbtdvp trajectory\n";
  out << "# schema_version = " << kOutputSchemaVersion << '\n';
  for (const auto& [key, value] : settings(outcome.config)) out << "# " << key << " = " << value << '\n';
  out << "# recurrence_time = " << sci(outcome.recurrence_time) << '\n';
  out << "# reorganization_energy = " << sci(outcome.reorganization_energy) << '\n';
  out << "# discrete_reorganization_energy = " << sci(outcome.discrete_reorganization_energy) << '\n';
  out << "# mean_bath_energy = " << sci(outcome.trajectory.mean_bath_energy) << '\n';
  out << "# regularization_events = " << outcome.trajectory.regularization_events << '\n';
  out << kTableColumns << '\n';
  for (const ObservableRecord& r : outcome.trajectory.records) {
    out << sci(r.t) << ',' << sci(r.p_z) << ',' << sci(r.p_x) << ',' << sci(r.p_y) << ','
        << sci(r.entropy) << ',' << sci(r.sigma) << ',' << sci(r.e_total) << ','
        << sci(r.e_bath) << ',' << sci(r.norm) << '\n';
  }
}

std::string metadata_json(const RunOutcome& outcome) {
  nlohmann::ordered_json meta;
  meta["schema_version"] = kOutputSchemaVersion;
  nlohmann::ordered_json cfg;
  for (const auto& [key, value] : settings(outcome.config)) cfg[key] = value;
  meta["config"] = cfg;
  meta["recurrence_time"] = outcome.recurrence_time;
  meta["reorganization_energy"] = outcome.reorganization_energy;
  meta["discrete_reorganization_energy"] = outcome.discrete_reorganization_energy;
  meta["steps"] = outcome.trajectory.steps;
  meta["records"] = outcome.trajectory.records.size();
  meta["regularization_events"] = outcome.trajectory.regularization_events;
  if (outcome.config.integrator.compute_sigma) {
    meta["mean_bath_energy"] = outcome.trajectory.mean_bath_energy;
    meta["sigma_defined"] = outcome.trajectory.sigma_defined;
  }
  meta["warnings"] = outcome.trajectory.warnings;
  meta["wall_time_seconds"] = outcome.wall_seconds;
  return meta.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& table) {
  std::filesystem::path p = table;
  p += ".meta.json";
  return p;
}

void write_outputs(const RunOutcome& outcome, bool overwrite) {
  const std::filesystem::path table = outcome.config.output_path;
  const std::filesystem::path meta = sidecar_path(table);
  if (!overwrite) {
    for (const auto& p : {table, meta}) {
      if (std::filesystem::exists(p)) {
        throw std::runtime_error("refusing to overwrite existing output " + p.string() +
                                 " (pass --force)");
      }
    }
  }
  if (table.has_parent_path()) std::filesystem::create_directories(table.parent_path());
  {
    std::ofstream out(table, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + table.string());
    write_table(out, outcome);
  }
  std::ofstream out(meta, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + meta.string());
  out << metadata_json(outcome);
}

RunOutcome run(const RunConfig& config, bool overwrite) {
  config.validate();
  if (!overwrite) {
    // Fail before spending the integration time.
    for (const auto& p : {std::filesystem::path(config.output_path), sidecar_path(config.output_path)}) {
      if (std::filesystem::exists(p)) {
        throw std::runtime_error("refusing to overwrite existing output " + p.string() +
                                 " (pass --force)");
      }
    }
  }
  RunOutcome outcome = execute(config);
  write_outputs(outcome, overwrite);
  return outcome;
}

std::vector<ObservableRecord> read_table(std::istream& in) {
  std::vector<ObservableRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kTableColumns) throw std::runtime_error("unexpected table columns: " + line);
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double v[9];
    for (double& x : v) {
      if (!std::getline(row, cell, ',')) throw std::runtime_error("short table row: " + line);
      x = std::strtod(cell.c_str(), nullptr);
    }
    ObservableRecord r;
    r.t = v[0];
    r.p_z = v[1];
    r.p_x = v[2];
    r.p_y = v[3];
    r.entropy = v[4];
    r.sigma = v[5];
    r.e_total = v[6];
    r.e_bath = v[7];
    r.norm = v[8];
    records.push_back(r);
  }
  return records;
}

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::alpha: return "alpha";
    case SweepParameter::s: return "s";
    case SweepParameter::delta: return "delta";
  }
  return "?";
}

SweepParameter parse_sweep_parameter(std::string_view text) {
  if (text == "alpha") return SweepParameter::alpha;
  if (text == "s") return SweepParameter::s;
  if (text == "delta") return SweepParameter::delta;
  throw ConfigError("sweep parameter must be alpha, s or delta");
}

SweepRow summarize(double value, double delta, std::span<const ObservableRecord> records) {
  SweepRow row;
  row.value = value;
  row.ok = true;
  const auto t = column(records, [](const auto& r) { return r.t; });
  const auto pz = column(records, [](const auto& r) { return r.p_z; });
  const auto ent = column(records, [](const auto& r) { return r.entropy; });
  const auto sig = column(records, [](const auto& r) { return r.sigma; });
  row.steady_p_z = steady_value(t, pz);
  row.steady_entropy = steady_value(t, ent);
  row.sigma_saturation = steady_value(t, sig);
  if (!t.empty() && t.back() - t.front() >= minimum_classification_window(delta)) {
    row.classification = classify_dynamics(t, pz, delta).verdict;
  }
  return row;
}

std::size_t worker_limit() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv(kWorkerEnv)) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = static_cast<std::size_t>(cap);
  }
  return n;
}

std::vector<SweepRow> sweep(const RunConfig& base, SweepParameter parameter,
                            std::span<const double> values, const std::filesystem::path& out_dir,
                            bool overwrite, std::size_t workers) {
  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      const double value = values[i];
      RunConfig cfg = base;
      switch (parameter) {
        case SweepParameter::alpha: cfg.spectral.alpha = value; break;
        case SweepParameter::s: cfg.spectral.s = value; break;
        case SweepParameter::delta: cfg.delta = value; break;
      }
      cfg.output_path =
          (out_dir / (std::string(to_string(parameter)) + "_" + short_number(value) + ".csv")).string();
      try {
        const RunOutcome outcome = run(cfg, overwrite);
        rows[i] = summarize(value, cfg.delta, outcome.trajectory.records);
      } catch (const std::exception& e) {
        rows[i] = SweepRow{};
        rows[i].value = value;
        rows[i].ok = false;
        rows[i].error = e.what();
      }
      rows[i].table_path = cfg.output_path;
    }
  };

  const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), values.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  return rows;
}

void write_sweep_summary(std::ostream& out, SweepParameter parameter,
                         std::span<const SweepRow> rows) {
  out << "# sbtdvp sweep summary\n";
  out << "# schema_version = " << kOutputSchemaVersion << '\n';
  out << to_string(parameter)
      << ",status,classification,steady_p_z,steady_entropy,sigma_saturation,table,error\n";
  for (const SweepRow& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << sci(r.value) << ',' << (r.ok ? "ok" : "failed") << ','
        << (r.classification ? std::string(to_string(*r.classification)) : "n/a") << ','
        << sci(r.ok ? r.steady_p_z : NAN) << ',' << sci(r.ok ? r.steady_entropy : NAN) << ','
        << sci(r.ok ? r.sigma_saturation : NAN) << ',' << r.table_path << ',' << error << '\n';
  }
}

InitialConditionComparison compare_initial_conditions(const RunConfig& first,
                                                      const RunConfig& second) {
  if (first.initial_condition == second.initial_condition) {
    throw ConfigError("compare: the two configs use the same initial condition");
  }
  auto key_set = [](const RunConfig& c) {
    auto s = settings(c);
    std::erase_if(s, [](const auto& kv) { return kv.first == "initial_condition" || kv.first == "output"; });
    return s;
  };
  if (key_set(first) != key_set(second)) {
    throw ConfigError("compare: configs differ in more than the initial condition");
  }
  const RunConfig& fact = first.initial_condition == InitialCondition::factorized ? first : second;
  const RunConfig& pol = first.initial_condition == InitialCondition::factorized ? second : first;

  const RunOutcome a = execute(fact);
  const RunOutcome b = execute(pol);
  const auto& ra = a.trajectory.records;
  const auto& rb = b.trajectory.records;

  InitialConditionComparison cmp;
  cmp.t = column(ra, [](const auto& r) { return r.t; });
  cmp.p_z_factorized = column(ra, [](const auto& r) { return r.p_z; });
  cmp.p_z_polarized = column(rb, [](const auto& r) { return r.p_z; });
  cmp.difference = series_difference(cmp.t, cmp.p_z_factorized, cmp.p_z_polarized);
  cmp.steady_factorized = steady_value(cmp.t, cmp.p_z_factorized);
  cmp.steady_polarized = steady_value(cmp.t, cmp.p_z_polarized);
  return cmp;
}

void write_comparison(std::ostream& out, const InitialConditionComparison& c) {
  out << "# sbtdvp initial-condition comparison\n";
  out << "# schema_version = " << kOutputSchemaVersion << '\n';
  out << "# max_abs_difference = " << sci(c.difference.max_abs) << '\n';
  out << "# integrated_abs_difference = " << sci(c.difference.integrated_abs) << '\n';
  out << "# steady_p_z_factorized = " << sci(c.steady_factorized) << '\n';
  out << "# steady_p_z_polarized = " << sci(c.steady_polarized) << '\n';
  out << "t,p_z_factorized,p_z_polarized\n";
  for (std::size_t k = 0; k < c.t.size(); ++k) {
    out << sci(c.t[k]) << ',' << sci(c.p_z_factorized[k]) << ',' << sci(c.p_z_polarized[k]) << '\n';
  }
}

OracleCheckReport oracle_check(const OracleCheckConfig& cfg) {
  const DiscreteBath bath(cfg.spectral, cfg.n_modes, cfg.omega_max);
  const oracle::FockSystem system = oracle::build_hamiltonian(bath, cfg.n_max, cfg.delta);

  VariationalState state = init_state(cfg.initial_condition, bath);
  oracle::Embedding start = oracle::embed_state(system, state, true);
  oracle::FockVector psi = std::move(start.vector);
  oracle::LanczosPropagator propagator(system.hamiltonian);
  Rk4Stepper stepper(bath, cfg.delta, 1e-8);
  StateDerivative derivative;

  OracleCheckReport report;
  report.truncation_defect = start.truncation_defect;
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_max / cfg.dt));
  const double sample_dt = cfg.dt * static_cast<double>(cfg.sample_every);

  auto sample = [&](double t) {
    const oracle::ExactSample exact = oracle::measure(system, psi, t);
    const double pz = observables(state).z;
    report.t.push_back(t);
    report.p_z_variational.push_back(pz);
    report.p_z_exact.push_back(exact.p_z);
    report.max_p_z_error = std::max(report.max_p_z_error, std::abs(pz - exact.p_z));
    report.max_entropy_error = std::max(report.max_entropy_error, std::abs(entropy(state) - exact.entropy));
    for (std::size_t l = 0; l < bath.size(); ++l) {
      report.max_displacement = std::max({report.max_displacement, std::abs(state.f[l]), std::abs(state.g[l])});
    }
    eom_rhs(state, bath, cfg.delta, 1e-8, derivative);
    const double closed = deviation_norm_squared(state, derivative, bath, cfg.delta);
    const oracle::ExactDeviation brute = oracle::exact_deviation(system, state, derivative);
    report.truncation_defect = std::max(report.truncation_defect, brute.truncation_defect);
    const double rel = std::abs(closed - brute.delta_norm_sq) / std::max(std::abs(brute.delta_norm_sq), 1e-14);
    report.max_deviation_rel_error = std::max(report.max_deviation_rel_error, rel);
    ++report.deviation_samples;
  };

  sample(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    stepper.step(state, cfg.dt);
    state.t = static_cast<double>(k) * cfg.dt;
    if (k % cfg.sample_every == 0) {
      propagator.step(psi, sample_dt);
      sample(state.t);
    }
  }
  return report;
}

}  // namespace sbtdvp
