#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sbtdvp/analysis.hpp"

using namespace sbtdvp;

namespace {

struct Series {
  std::vector<double> t, x;
};

template <class F>
Series sample(F fn, double t_max, double dt) {
  Series s;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt) {
    s.t.push_back(t);
    s.x.push_back(fn(t));
  }
  return s;
}

}  // namespace

TEST_CASE("pure cosine is coherent") {
  const double delta = 0.1;
  const auto s = sample([&](double t) { return std::cos(delta * t); }, 320.0, 0.1);
  const auto c = classify_dynamics(s.t, s.x, delta);
  CHECK(c.verdict == Coherence::coherent);
  CHECK(c.extrema.size() >= 9);
  // the first and last are cut off by the transient and the window edge
  for (std::size_t i = 1; i + 1 < c.extrema.size(); ++i) CHECK(c.extrema[i].prominence > 1.9);
}

TEST_CASE("monotone decay is incoherent") {
  const auto s = sample([](double t) { return std::exp(-t); }, 320.0, 0.1);
  CHECK(classify_dynamics(s.t, s.x, 0.1).verdict == Coherence::incoherent);
  const auto slow = sample([](double t) { return 0.5 + 0.5 * std::exp(-0.01 * t); }, 320.0, 0.1);
  CHECK(classify_dynamics(slow.t, slow.x, 0.1).verdict == Coherence::incoherent);
}

TEST_CASE("ripples below the prominence threshold do not count") {
  const auto s = sample([](double t) { return std::exp(-0.02 * t) + 2e-4 * std::sin(t); }, 320.0, 0.05);
  CHECK(classify_dynamics(s.t, s.x, 0.1).verdict == Coherence::incoherent);
  CHECK(classify_dynamics(s.t, s.x, 0.1, 1e-4).verdict == Coherence::coherent);
}

TEST_CASE("damped oscillation is coherent") {
  const auto s = sample([](double t) { return std::exp(-0.01 * t) * std::cos(0.1 * t); }, 320.0, 0.1);
  CHECK(classify_dynamics(s.t, s.x, 0.1).verdict == Coherence::coherent);
}

TEST_CASE("short windows are rejected") {
  const auto s = sample([](double t) { return std::cos(0.1 * t); }, 40.0, 0.1);
  CHECK(minimum_classification_window(0.1) == doctest::Approx(100.0 * std::numbers::pi));
  CHECK_THROWS_AS(classify_dynamics(s.t, s.x, 0.1), std::invalid_argument);
}

TEST_CASE("extrema and prominence") {
  const std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
  const std::vector<double> x{0, 2, 1, 3, 0, 0.5, 0.4};
  const auto ex = find_extrema(t, x);
  REQUIRE(ex.size() == 5);
  CHECK(ex[0].is_maximum);
  CHECK(ex[0].t == 1.0);
  CHECK(ex[0].prominence == doctest::Approx(1.0));  // saddle at 1 before the higher peak
  CHECK(ex[2].t == 3.0);
  CHECK(ex[2].prominence == doctest::Approx(3.0));
  CHECK_FALSE(ex[1].is_maximum);
}

TEST_CASE("steady value is the mean over the final quarter") {
  const auto s = sample([](double t) { return t < 75.0 ? 5.0 : 1.0; }, 100.0, 0.5);
  CHECK(steady_value(s.t, s.x) == doctest::Approx(1.0));
  const auto ramp = sample([](double t) { return t; }, 100.0, 0.5);
  CHECK(steady_value(ramp.t, ramp.x) == doctest::Approx(87.5));
  CHECK(steady_value(ramp.t, ramp.x, 1.0) == doctest::Approx(50.0));
}

TEST_CASE("oscillation frequency estimators") {
  const auto s = sample([](double t) { return std::cos(0.35 * t); }, 200.0, 0.05);
  CHECK(std::abs(first_minimum_time(s.t, s.x) - std::numbers::pi / 0.35) <= 0.05);  // one sample
  CHECK(spectral_peak_frequency(s.t, s.x, 0.05, 1.0, 4000) == doctest::Approx(0.35).epsilon(2e-3));
  const auto mono = sample([](double t) { return -t; }, 10.0, 0.1);
  CHECK(std::isnan(first_minimum_time(mono.t, mono.x)));
}

TEST_CASE("series difference") {
  const std::vector<double> t{0, 1, 2};
  const std::vector<double> a{0, 1, 0};
  const std::vector<double> b{0, -1, 0};
  const auto d = series_difference(t, a, b);
  CHECK(d.max_abs == 2.0);
  CHECK(d.integrated_abs == doctest::Approx(2.0));
  CHECK(series_difference(t, a, a).max_abs == 0.0);
}
