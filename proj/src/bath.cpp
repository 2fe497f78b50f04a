#include "sbtdvp/bath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sbtdvp {

void SpectralParams::validate() const {
  if (!(s > 0.0)) throw std::invalid_argument("spectral exponent s must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("coupling alpha must be >= 0");
  if (!(omega_c > 0.0)) throw std::invalid_argument("cutoff omega_c must be > 0");
}

double spectral_density(double omega, const SpectralParams& params) {
  if (!(omega >= 0.0)) {
    throw std::invalid_argument("spectral_density: negative frequency " + std::to_string(omega));
  }
  if (omega == 0.0) return 0.0;
  return 2.0 * params.alpha * std::pow(params.omega_c, 1.0 - params.s) *
         std::pow(omega, params.s) * std::exp(-omega / params.omega_c);
}

double reorganization_energy(const SpectralParams& params) {
  if (!(params.s > 0.0)) {
    throw std::invalid_argument("reorganization_energy: Gamma(s) has a pole at s <= 0");
  }
  return 2.0 * params.alpha * params.omega_c * std::tgamma(params.s);
}

DiscreteBath::DiscreteBath(const SpectralParams& params, std::size_t n_modes, double omega_max)
    : params_(params) {
  params.validate();
  if (n_modes < 1) throw std::invalid_argument("discretize_bath: n_modes must be >= 1");
  if (!(omega_max > 0.0)) throw std::invalid_argument("discretize_bath: omega_max must be > 0");

  delta_omega_ = omega_max / static_cast<double>(n_modes);
  omega_max_ = omega_max;
  omegas_.resize(n_modes);
  lambdas_.resize(n_modes);
  for (std::size_t i = 0; i < n_modes; ++i) {
    // w_l = l * dw with l = i + 1; computed directly to avoid accumulation drift
    const double w = static_cast<double>(i + 1) * delta_omega_;
    omegas_[i] = w;
    lambdas_[i] = std::sqrt(spectral_density(w, params) * delta_omega_);
  }
}

DiscreteBath DiscreteBath::from_modes(std::vector<double> omegas, std::vector<double> lambdas) {
  if (omegas.empty() || omegas.size() != lambdas.size()) {
    throw std::invalid_argument("from_modes: need matching, non-empty frequency and coupling lists");
  }
  double w_max = 0.0;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!(omegas[i] > 0.0)) throw std::invalid_argument("from_modes: frequencies must be > 0");
    if (!(lambdas[i] >= 0.0)) throw std::invalid_argument("from_modes: couplings must be >= 0");
    w_max = std::max(w_max, omegas[i]);
  }
  DiscreteBath bath;
  bath.params_ = SpectralParams{1.0, 0.0, 1.0};
  bath.delta_omega_ = omegas.front();
  bath.omega_max_ = w_max;
  bath.omegas_ = std::move(omegas);
  bath.lambdas_ = std::move(lambdas);
  return bath;
}

double DiscreteBath::recurrence_time() const { return 2.0 * std::numbers::pi / delta_omega_; }

double DiscreteBath::reorganization_energy() const {
  double sum = 0.0;
  for (std::size_t l = 0; l < size(); ++l) sum += lambdas_[l] * lambdas_[l] / omegas_[l];
  return sum;
}

double DiscreteBath::coupling_weight() const {
  double sum = 0.0;
  for (double lam : lambdas_) sum += lam * lam;
  return sum;
}

}  // namespace sbtdvp
