#include "sbtdvp/state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbtdvp {

namespace {

// Eigenvalues closer than this to 0 or 1 are treated as exactly 0 or 1.
constexpr double kEntropyBoundary = 1e-15;
constexpr double kDiscriminantTolerance = 1e-12;

// Eigenvalues within kEntropyBoundary of 0 or 1 contribute nothing.
double neg_x_log_x(double x) {
  if (x <= kEntropyBoundary || x >= 1.0 - kEntropyBoundary) return 0.0;
  return -x * std::log(x);
}

}  // namespace

std::string_view to_string(InitialCondition ic) {
  return ic == InitialCondition::factorized ? "factorized" : "polarized";
}

InitialCondition parse_initial_condition(std::string_view text) {
  if (text == "factorized") return InitialCondition::factorized;
  if (text == "polarized") return InitialCondition::polarized;
  throw std::invalid_argument("unknown initial condition '" + std::string(text) +
                              "' (expected factorized or polarized)");
}

VariationalState init_state(InitialCondition condition, const DiscreteBath& bath) {
  VariationalState state;
  state.a = {1.0, 0.0};
  state.b = {0.0, 0.0};
  state.f.assign(bath.size(), cplx{});
  if (condition == InitialCondition::polarized) {
    for (std::size_t l = 0; l < bath.size(); ++l) {
      state.f[l] = -bath.lambda(l) / (2.0 * bath.omega(l));
    }
  }
  state.g = state.f;
  return state;
}

cplx overlap_exponent(const VariationalState& state) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t l = 0; l < state.f.size(); ++l) {
    const cplx f = state.f[l];
    const cplx g = state.g[l];
    // f^* g - (|f|^2 + |g|^2)/2 = -|f - g|^2 / 2 + i Im(f^* g)
    const cplx d = f - g;
    re -= 0.5 * std::norm(d);
    im += f.real() * g.imag() - f.imag() * g.real();
  }
  return {re, im};
}

double displacement_distance_sq(const VariationalState& state) {
  double sum = 0.0;
  for (std::size_t l = 0; l < state.f.size(); ++l) sum += std::norm(state.f[l] - state.g[l]);
  return sum;
}

SpinExpectations observables(const VariationalState& state) {
  const cplx coherence = std::conj(state.a) * state.b * std::exp(overlap_exponent(state));
  return {2.0 * coherence.real(), 2.0 * coherence.imag(), std::norm(state.a) - std::norm(state.b)};
}

ReducedSpectrum reduced_spectrum(const VariationalState& state) {
  const double ab = std::norm(state.a) * std::norm(state.b);
  // 4|A|^2|B|^2 (exp(-D) - 1), never positive
  const double shift = 4.0 * ab * std::expm1(-displacement_distance_sq(state));
  double disc = 1.0 + shift;
  if (disc < -kDiscriminantTolerance) {
    throw std::logic_error("reduced_spectrum: negative discriminant " + std::to_string(disc));
  }
  if (disc < 0.0) disc = 0.0;
  const double root = std::sqrt(disc);
  // (1 - root)/2 written without cancellation
  const double minus = -shift / (2.0 * (1.0 + root));
  return {1.0 - minus, minus};
}

double two_level_entropy(double p_plus, double p_minus) {
  return neg_x_log_x(p_plus) + neg_x_log_x(p_minus);
}

double entropy(const VariationalState& state) {
  const ReducedSpectrum w = reduced_spectrum(state);
  if (w.minus <= kEntropyBoundary) return 0.0;
  return neg_x_log_x(w.minus) - w.plus * std::log1p(-w.minus);
}

double bath_energy(const VariationalState& state, const DiscreteBath& bath) {
  double sf = 0.0;
  double sg = 0.0;
  for (std::size_t l = 0; l < bath.size(); ++l) {
    sf += bath.omega(l) * std::norm(state.f[l]);
    sg += bath.omega(l) * std::norm(state.g[l]);
  }
  return std::norm(state.a) * sf + std::norm(state.b) * sg;
}

double total_energy(const VariationalState& state, const DiscreteBath& bath, double delta) {
  double wf = 0.0;
  double wg = 0.0;
  double lf = 0.0;
  double lg = 0.0;
  for (std::size_t l = 0; l < bath.size(); ++l) {
    const double w = bath.omega(l);
    const double lam = bath.lambda(l);
    wf += w * std::norm(state.f[l]);
    wg += w * std::norm(state.g[l]);
    lf += lam * state.f[l].real();
    lg += lam * state.g[l].real();
  }
  const double pa = std::norm(state.a);
  const double pb = std::norm(state.b);
  const cplx coherence = std::conj(state.a) * state.b * std::exp(overlap_exponent(state));
  return pa * wf + pb * wg - delta * coherence.real() + pa * lf - pb * lg;
}

ObservableRecord make_record(const VariationalState& state, const DiscreteBath& bath, double delta) {
  ObservableRecord rec;
  const SpinExpectations p = observables(state);
  rec.t = state.t;
  rec.p_x = p.x;
  rec.p_y = p.y;
  rec.p_z = p.z;
  rec.entropy = entropy(state);
  rec.e_total = total_energy(state, bath, delta);
  rec.e_bath = bath_energy(state, bath);
  rec.norm = state.norm();
  return rec;
}

}  // namespace sbtdvp
