#pragma once

#include <limits>
#include <span>
#include <vector>

#include "sbtdvp/bath.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/state.hpp"

namespace sbtdvp {

/// Pieces of <delta|delta> for |delta> = (i d/dt - H)|D>.
struct DeviationBreakdown {
  double dd = 0.0;     ///< <Ddot|Ddot>
  double hh = 0.0;     ///< <D|H^2|D>
  double cross = 0.0;  ///< 2 Im <D|H|Ddot>
  /// Squared residual norm, assembled directly from the residual vector rather
  /// than as dd + hh + cross, so it keeps precision when those cancel.
  double delta_norm_sq = 0.0;
  double e_bath_avg = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
};

/// Closed-form O(N_b) evaluation. `derivative` may be any tangent vector; it
/// need not come from eom_rhs. Throws std::logic_error if the result is
/// negative beyond roundoff.
DeviationBreakdown deviation_breakdown(const VariationalState& state,
                                       const StateDerivative& derivative,
                                       const DiscreteBath& bath, double delta);

double deviation_norm_squared(const VariationalState& state, const StateDerivative& derivative,
                              const DiscreteBath& bath, double delta);

/// Threshold below which the mean bath energy is treated as zero.
inline constexpr double kMinMeanBathEnergy = 1e-12;

struct SigmaSeries {
  std::vector<double> sigma;
  /// Full-interval mean (for BathAverage::running, the value at the final time).
  double e_bath_avg = 0.0;
  /// False when the mean bath energy is below kMinMeanBathEnergy; sigma is NaN then.
  bool defined = true;
};

/// sigma_k = sqrt(<delta|delta>_k) / mean bath energy, the mean taken with the
/// trapezoidal rule over the sampled times.
SigmaSeries relative_deviation(std::span<const double> times,
                               std::span<const double> deviation_sq,
                               std::span<const double> bath_energy,
                               BathAverage mode = BathAverage::full_interval);

/// Fills sigma in place on a finished trajectory.
void apply_relative_deviation(Trajectory& trajectory, BathAverage mode);

}  // namespace sbtdvp
