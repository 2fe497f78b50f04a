#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sbtdvp/bath.hpp"
#include "sbtdvp/state.hpp"

namespace sbtdvp {

/// Time derivatives (dA/dt, dB/dt, df_l/dt, dg_l/dt) of a variational state.
struct StateDerivative {
  cplx da{};
  cplx db{};
  std::vector<cplx> df;
  std::vector<cplx> dg;
  /// Set when |A| or |B| fell below the regularization floor during evaluation.
  bool regularized = false;
};

/// Explicit equations of motion. The amplitude ratios B/A and A/B are evaluated
/// as B A^*/max(|A|^2, eps^2) and A B^*/max(|B|^2, eps^2). See docs/equations_of_motion.md.
void eom_rhs(const VariationalState& state, const DiscreteBath& bath, double delta,
             double epsilon_amp, StateDerivative& out);
StateDerivative eom_rhs(const VariationalState& state, const DiscreteBath& bath, double delta,
                        double epsilon_amp = 1e-8);

/// How the mean bath energy that normalizes sigma(t) is formed.
enum class BathAverage {
  full_interval,  ///< time average over [0, t_max]
  running,        ///< time average over [0, t]
};

struct IntegratorConfig {
  double dt = 0.01;
  double t_max = 40.0;
  std::size_t record_every = 10;
  double epsilon_amp = 1e-8;
  /// Abort once | |A|^2 + |B|^2 - 1 | exceeds this.
  double norm_tolerance = 1e-4;
  bool compute_sigma = false;
  BathAverage bath_average = BathAverage::full_interval;

  /// Throws std::invalid_argument; needs the bath for the dt * w_max bound.
  void validate(const DiscreteBath& bath) const;
};

/// Raised when the norm drifts past IntegratorConfig::norm_tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  NumericalFailure(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct TrajectoryCallbacks {
  /// Called as each record is produced. sigma is not final until the run ends.
  std::function<void(const ObservableRecord&)> on_record;
  std::function<void(std::string_view)> on_warning;
};

struct Trajectory {
  std::vector<ObservableRecord> records;
  VariationalState final_state;
  std::size_t steps = 0;
  std::size_t regularization_events = 0;
  /// Time-averaged bath energy over [0, t_max]; NaN when sigma is not computed.
  double mean_bath_energy = std::numeric_limits<double>::quiet_NaN();
  /// False when sigma was requested but the mean bath energy vanished.
  bool sigma_defined = false;
  std::vector<std::string> warnings;
};

/// Classical fixed-step RK4 with preallocated stage buffers.
class Rk4Stepper {
 public:
  Rk4Stepper(const DiscreteBath& bath, double delta, double epsilon_amp);
  /// Advances state by dt in place. Returns the number of RHS evaluations
  /// that hit the amplitude floor.
  std::size_t step(VariationalState& state, double dt);

 private:
  const DiscreteBath& bath_;
  double delta_;
  double epsilon_amp_;
  std::vector<cplx> stage_f_, stage_g_, acc_f_, acc_g_;
};

/// Integrates from `initial` to config.t_max, recording every record_every-th
/// step plus the final one. Throws NumericalFailure on norm drift.
Trajectory integrate(const VariationalState& initial, const DiscreteBath& bath, double delta,
                     const IntegratorConfig& config, const TrajectoryCallbacks& callbacks = {});

}  // namespace sbtdvp
