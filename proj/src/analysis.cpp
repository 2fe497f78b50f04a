#include "sbtdvp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sbtdvp {

std::string_view to_string(Coherence c) {
  return c == Coherence::coherent ? "coherent" : "incoherent";
}

double minimum_classification_window(double delta) { return 10.0 * std::numbers::pi / delta; }

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": series lengths differ");
}

int sign(double x) { return (x > 0.0) - (x < 0.0); }

// Prominence of a maximum at i: height above the higher of the lowest points
// reached on either side before the series climbs above the peak.
double prominence_of_max(std::span<const double> v, std::size_t i) {
  const double peak = v[i];
  double left_min = peak;
  for (std::size_t j = i; j-- > 0;) {
    if (v[j] > peak) break;
    left_min = std::min(left_min, v[j]);
  }
  double right_min = peak;
  for (std::size_t j = i + 1; j < v.size(); ++j) {
    if (v[j] > peak) break;
    right_min = std::min(right_min, v[j]);
  }
  return peak - std::max(left_min, right_min);
}

}  // namespace

std::vector<Extremum> find_extrema(std::span<const double> times, std::span<const double> values) {
  check_lengths(times, values, "find_extrema");
  std::vector<Extremum> out;
  const std::size_t n = values.size();
  if (n < 3) return out;

  std::vector<double> negated(values.begin(), values.end());
  for (double& x : negated) x = -x;

  // Flat stretches inherit the previous slope sign.
  int prev = 0;
  std::size_t turn = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const int s = sign(values[k + 1] - values[k]);
    if (s == 0) continue;
    if (prev != 0 && s != prev) {
      Extremum e;
      e.index = turn;
      e.t = times[turn];
      e.value = values[turn];
      e.is_maximum = prev > 0;
      e.prominence = e.is_maximum ? prominence_of_max(values, turn) : prominence_of_max(negated, turn);
      out.push_back(e);
    }
    prev = s;
    turn = k + 1;
  }
  return out;
}

Classification classify_dynamics(std::span<const double> times, std::span<const double> p_z,
                                 double delta, double prominence) {
  check_lengths(times, p_z, "classify_dynamics");
  if (!(delta > 0.0)) throw std::invalid_argument("classify_dynamics: delta must be > 0");
  if (times.size() < 3 || times.back() - times.front() < minimum_classification_window(delta) * (1.0 - 1e-12)) {
    throw std::invalid_argument("classify_dynamics: trajectory shorter than five bare Rabi periods");
  }
  const double transient = times.front() + 1.0 / delta;
  std::size_t start = 0;
  while (start < times.size() && times[start] <= transient) ++start;

  Classification out;
  const auto t_tail = times.subspan(start);
  const auto v_tail = p_z.subspan(start);
  for (Extremum e : find_extrema(t_tail, v_tail)) {
    if (e.prominence > prominence) {
      e.index += start;
      out.extrema.push_back(e);
    }
  }
  out.verdict = out.extrema.size() >= 2 ? Coherence::coherent : Coherence::incoherent;
  return out;
}

double steady_value(std::span<const double> times, std::span<const double> values, double fraction) {
  check_lengths(times, values, "steady_value");
  if (times.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("steady_value: fraction must lie in (0, 1]");
  }
  const double t_end = times.back();
  const double t_start = t_end - fraction * (t_end - times.front());
  std::size_t k = 0;
  while (k < times.size() && times[k] < t_start) ++k;
  if (k + 1 >= times.size()) return values.back();

  double integral = 0.0;
  for (std::size_t j = k + 1; j < times.size(); ++j) {
    integral += 0.5 * (times[j] - times[j - 1]) * (values[j] + values[j - 1]);
  }
  const double width = t_end - times[k];
  return width > 0.0 ? integral / width : values[k];
}

double first_minimum_time(std::span<const double> times, std::span<const double> values) {
  for (const Extremum& e : find_extrema(times, values)) {
    if (!e.is_maximum) return e.t;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double spectral_peak_frequency(std::span<const double> times, std::span<const double> values,
                               double omega_lo, double omega_hi, std::size_t points) {
  check_lengths(times, values, "spectral_peak_frequency");
  if (times.size() < 2 || points < 2 || !(omega_hi > omega_lo)) {
    throw std::invalid_argument("spectral_peak_frequency: bad window or frequency range");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());

  double best_omega = omega_lo;
  double best_power = -1.0;
  for (std::size_t p = 0; p < points; ++p) {
    const double omega = omega_lo + (omega_hi - omega_lo) * static_cast<double>(p) /
                                        static_cast<double>(points - 1);
    std::complex<double> acc{};
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
      const double dt = times[k + 1] - times[k];
      acc += (values[k] - mean) * std::polar(dt, -omega * times[k]);
    }
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  return best_omega;
}

SeriesDifference series_difference(std::span<const double> times, std::span<const double> a,
                                   std::span<const double> b) {
  check_lengths(times, a, "series_difference");
  check_lengths(times, b, "series_difference");
  SeriesDifference out;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    out.max_abs = std::max(out.max_abs, d);
    if (k > 0) {
      out.integrated_abs += 0.5 * (times[k] - times[k - 1]) * (d + std::abs(a[k - 1] - b[k - 1]));
    }
  }
  return out;
}

}  // namespace sbtdvp
