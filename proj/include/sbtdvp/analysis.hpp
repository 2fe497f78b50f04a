#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sbtdvp {

enum class Coherence { coherent, incoherent };

std::string_view to_string(Coherence c);

struct Extremum {
  std::size_t index = 0;
  double t = 0.0;
  double value = 0.0;
  double prominence = 0.0;
  bool is_maximum = false;
};

struct Classification {
  Coherence verdict = Coherence::incoherent;
  /// Extrema after the transient whose prominence exceeds the threshold.
  std::vector<Extremum> extrema;
};

inline constexpr double kDefaultProminence = 1e-3;

/// Shortest window classify_dynamics accepts: five bare Rabi periods.
double minimum_classification_window(double delta);

/// Coherent when P_z has at least two local extrema with prominence above
/// `prominence` after t > 1/delta. Throws std::invalid_argument when the
/// series spans less than minimum_classification_window(delta).
Classification classify_dynamics(std::span<const double> times, std::span<const double> p_z,
                                 double delta, double prominence = kDefaultProminence);

/// Local extrema (strict slope sign changes) with topographic prominence.
std::vector<Extremum> find_extrema(std::span<const double> times, std::span<const double> values);

/// Trapezoidal mean over the final `fraction` of the time window.
double steady_value(std::span<const double> times, std::span<const double> values,
                    double fraction = 0.25);

/// Time of the first local minimum of the series; NaN if there is none.
double first_minimum_time(std::span<const double> times, std::span<const double> values);

/// Frequency in [omega_lo, omega_hi] maximizing |sum_k (x_k - mean) e^{-i w t_k}| dt,
/// scanned on `points` equally spaced frequencies.
double spectral_peak_frequency(std::span<const double> times, std::span<const double> values,
                               double omega_lo, double omega_hi, std::size_t points = 2000);

/// max |a_k - b_k| and trapezoidal integral of |a_k - b_k| over the shared grid.
struct SeriesDifference {
  double max_abs = 0.0;
  double integrated_abs = 0.0;
};

SeriesDifference series_difference(std::span<const double> times, std::span<const double> a,
                                   std::span<const double> b);

}  // namespace sbtdvp
