#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sbtdvp {

/// Continuous bath J(w) = 2 alpha wc^(1-s) w^s exp(-w/wc). wc sets the energy unit.
struct SpectralParams {
  double s = 0.25;
  double alpha = 0.1;
  double omega_c = 1.0;

  void validate() const;
};

double spectral_density(double omega, const SpectralParams& params);

/// Integral of J(w)/w over [0, inf): 2 alpha wc Gamma(s).
double reorganization_energy(const SpectralParams& params);

/// Equally spaced discretization w_l = l*dw, l = 1..N, with lambda_l^2 = J(w_l) dw.
/// Immutable once built; safe to share between trajectories.
class DiscreteBath {
 public:
  DiscreteBath(const SpectralParams& params, std::size_t n_modes, double omega_max);

  /// Arbitrary mode set, used by the small-bath oracle and tests. No spectral
  /// parameters are attached; delta_omega is taken from the first frequency.
  static DiscreteBath from_modes(std::vector<double> omegas, std::vector<double> lambdas);

  std::size_t size() const { return omegas_.size(); }
  std::span<const double> omegas() const { return omegas_; }
  std::span<const double> lambdas() const { return lambdas_; }
  double omega(std::size_t l) const { return omegas_[l]; }
  double lambda(std::size_t l) const { return lambdas_[l]; }

  double delta_omega() const { return delta_omega_; }
  double omega_max() const { return omega_max_; }
  /// Poincare recurrence time 2 pi / dw.
  double recurrence_time() const;
  const SpectralParams& params() const { return params_; }

  /// sum_l lambda_l^2 / w_l, the discrete (truncated) reorganization energy.
  double reorganization_energy() const;
  /// sum_l lambda_l^2.
  double coupling_weight() const;

 private:
  DiscreteBath() = default;

  SpectralParams params_{};
  std::vector<double> omegas_;
  std::vector<double> lambdas_;
  double delta_omega_ = 0.0;
  double omega_max_ = 0.0;
};

inline DiscreteBath discretize_bath(const SpectralParams& params, std::size_t n_modes,
                                    double omega_max) {
  return DiscreteBath(params, n_modes, omega_max);
}

}  // namespace sbtdvp
