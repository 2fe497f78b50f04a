#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sbtdvp/bath.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/state.hpp"

namespace testing_support {

using sbtdvp::cplx;

inline cplx random_cplx(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {scale * u(rng), scale * u(rng)};
}

// Normalized (A, B) with both amplitudes bounded away from zero, displacements of
// modulus at most max_disp.
inline sbtdvp::VariationalState random_state(std::mt19937_64& rng, std::size_t modes,
                                             double max_disp) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  sbtdvp::VariationalState st;
  const double theta = 0.2 + 1.1 * u(rng);
  st.a = std::polar(std::cos(theta), 2.0 * M_PI * u(rng));
  st.b = std::polar(std::sin(theta), 2.0 * M_PI * u(rng));
  const double per = max_disp / std::sqrt(2.0);
  for (std::size_t l = 0; l < modes; ++l) {
    st.f.push_back(random_cplx(rng, per));
    st.g.push_back(random_cplx(rng, per));
  }
  return st;
}

inline sbtdvp::StateDerivative random_derivative(std::mt19937_64& rng, std::size_t modes,
                                                 double scale) {
  sbtdvp::StateDerivative d;
  d.da = random_cplx(rng, scale);
  d.db = random_cplx(rng, scale);
  for (std::size_t l = 0; l < modes; ++l) {
    d.df.push_back(random_cplx(rng, scale));
    d.dg.push_back(random_cplx(rng, scale));
  }
  return d;
}

// Two or three modes with couplings from the continuum density, as used for oracle runs.
inline sbtdvp::DiscreteBath small_bath(std::size_t modes, double alpha, double omega_max = 3.0,
                                       double s = 0.25) {
  return sbtdvp::DiscreteBath(sbtdvp::SpectralParams{s, alpha, 1.0}, modes, omega_max);
}

inline double state_distance(const sbtdvp::VariationalState& x, const sbtdvp::VariationalState& y) {
  double d = std::norm(x.a - y.a) + std::norm(x.b - y.b);
  for (std::size_t l = 0; l < x.f.size(); ++l) d += std::norm(x.f[l] - y.f[l]) + std::norm(x.g[l] - y.g[l]);
  return std::sqrt(d);
}

}  // namespace testing_support
