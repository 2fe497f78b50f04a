#include "sbtdvp/deviation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbtdvp {

namespace {

enum class Spin { up, down };

// (c0 + sum_l c_l b_l^dag) |z> in one spin sector; empty c means zero.
struct DressedCoherent {
  Spin spin;
  const std::vector<cplx>* z;
  cplx c0;
  std::vector<cplx> c;
};

// <(c0 + c.b^dag) z | (d0 + d.b^dag) w>
//   = <z|w> [ (c0^* + c^*.w)(d0 + d.z^*) + c^*.d ]
cplx inner(const DressedCoherent& p, const DressedCoherent& q) {
  if (p.spin != q.spin) return {};
  const std::vector<cplx>& z = *p.z;
  const std::vector<cplx>& w = *q.z;
  const std::size_t n = z.size();
  cplx log_overlap{};
  cplx cw{};
  cplx dz{};
  cplx cd{};
  for (std::size_t l = 0; l < n; ++l) {
    log_overlap += std::conj(z[l]) * w[l] - 0.5 * (std::norm(z[l]) + std::norm(w[l]));
    if (!p.c.empty()) cw += std::conj(p.c[l]) * w[l];
    if (!q.c.empty()) dz += q.c[l] * std::conj(z[l]);
    if (!p.c.empty() && !q.c.empty()) cd += std::conj(p.c[l]) * q.c[l];
  }
  return std::exp(log_overlap) * ((std::conj(p.c0) + cw) * (q.c0 + dz) + cd);
}

cplx inner(const std::vector<DressedCoherent>& lhs, const std::vector<DressedCoherent>& rhs) {
  cplx sum{};
  for (const auto& p : lhs) {
    for (const auto& q : rhs) sum += inner(p, q);
  }
  return sum;
}

double norm_sq(const std::vector<DressedCoherent>& v) { return inner(v, v).real(); }

struct Expansions {
  std::vector<DressedCoherent> ddot;      // d/dt |D>
  std::vector<DressedCoherent> h_d;       // H |D>
  std::vector<DressedCoherent> residual;  // (i d/dt - H) |D>
};

Expansions expand(const VariationalState& s, const StateDerivative& d, const DiscreteBath& bath,
                  double delta) {
  const std::size_t n = s.f.size();
  if (s.g.size() != n || bath.size() != n || d.df.size() != n || d.dg.size() != n) {
    throw std::invalid_argument("deviation: state, derivative and bath sizes differ");
  }
  const cplx i{0.0, 1.0};

  // d|f>/dt = (fdot.b^dag - Re(f^*.fdot)) |f>
  double kappa_f = 0.0, kappa_g = 0.0;
  cplx lam_f{}, lam_g{};
  std::vector<cplx> a_fdot(n), b_gdot(n), h_up(n), h_down(n);
  for (std::size_t l = 0; l < n; ++l) {
    const double w = bath.omega(l);
    const double lam = bath.lambda(l);
    kappa_f += (std::conj(s.f[l]) * d.df[l]).real();
    kappa_g += (std::conj(s.g[l]) * d.dg[l]).real();
    lam_f += lam * s.f[l];
    lam_g += lam * s.g[l];
    a_fdot[l] = s.a * d.df[l];
    b_gdot[l] = s.b * d.dg[l];
    // w b^dag b |f> = w f b^dag |f>;  (lambda/2)(b + b^dag)|f> = (lambda/2)(f + b^dag)|f>
    h_up[l] = s.a * (w * s.f[l] + 0.5 * lam);
    h_down[l] = s.b * (w * s.g[l] - 0.5 * lam);
  }

  const cplx up_c0_dot = d.da - s.a * kappa_f;
  const cplx down_c0_dot = d.db - s.b * kappa_g;
  const cplx up_c0_h = 0.5 * s.a * lam_f;
  const cplx down_c0_h = -0.5 * s.b * lam_g;
  const double half_delta = 0.5 * delta;

  Expansions e;
  e.ddot.push_back({Spin::up, &s.f, up_c0_dot, a_fdot});
  e.ddot.push_back({Spin::down, &s.g, down_c0_dot, b_gdot});

  e.h_d.push_back({Spin::up, &s.f, up_c0_h, h_up});
  e.h_d.push_back({Spin::up, &s.g, -half_delta * s.b, {}});
  e.h_d.push_back({Spin::down, &s.g, down_c0_h, h_down});
  e.h_d.push_back({Spin::down, &s.f, -half_delta * s.a, {}});

  std::vector<cplx> r_up(n), r_down(n);
  for (std::size_t l = 0; l < n; ++l) {
    r_up[l] = i * a_fdot[l] - h_up[l];
    r_down[l] = i * b_gdot[l] - h_down[l];
  }
  e.residual.push_back({Spin::up, &s.f, i * up_c0_dot - up_c0_h, std::move(r_up)});
  e.residual.push_back({Spin::up, &s.g, half_delta * s.b, {}});
  e.residual.push_back({Spin::down, &s.g, i * down_c0_dot - down_c0_h, std::move(r_down)});
  e.residual.push_back({Spin::down, &s.f, half_delta * s.a, {}});
  return e;
}

}  // namespace

DeviationBreakdown deviation_breakdown(const VariationalState& state,
                                       const StateDerivative& derivative,
                                       const DiscreteBath& bath, double delta) {
  const Expansions e = expand(state, derivative, bath, delta);
  DeviationBreakdown out;
  out.dd = norm_sq(e.ddot);
  out.hh = norm_sq(e.h_d);
  out.cross = 2.0 * inner(e.h_d, e.ddot).imag();
  double value = norm_sq(e.residual);
  const double scale = out.dd + out.hh;
  if (value < -1e-6 * scale) {
    throw std::logic_error("deviation: assembled <delta|delta> = " + std::to_string(value) +
                           " is negative beyond roundoff");
  }
  out.delta_norm_sq = value < 0.0 ? 0.0 : value;
  return out;
}

double deviation_norm_squared(const VariationalState& state, const StateDerivative& derivative,
                              const DiscreteBath& bath, double delta) {
  const Expansions e = expand(state, derivative, bath, delta);
  const double value = norm_sq(e.residual);
  const double scale = norm_sq(e.ddot) + norm_sq(e.h_d);
  if (value < -1e-6 * scale) {
    throw std::logic_error("deviation: assembled <delta|delta> = " + std::to_string(value) +
                           " is negative beyond roundoff");
  }
  return value < 0.0 ? 0.0 : value;
}

SigmaSeries relative_deviation(std::span<const double> times, std::span<const double> deviation_sq,
                               std::span<const double> bath_energy, BathAverage mode) {
  const std::size_t n = times.size();
  if (deviation_sq.size() != n || bath_energy.size() != n) {
    throw std::invalid_argument("relative_deviation: series lengths differ");
  }
  SigmaSeries out;
  out.sigma.assign(n, std::numeric_limits<double>::quiet_NaN());
  if (n == 0) {
    out.defined = false;
    return out;
  }

  // Running trapezoidal integral of the bath energy.
  std::vector<double> integral(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    integral[k] = integral[k - 1] + 0.5 * (times[k] - times[k - 1]) * (bath_energy[k] + bath_energy[k - 1]);
  }
  const double span = times[n - 1] - times[0];
  const double full_mean = span > 0.0 ? integral[n - 1] / span : bath_energy[0];
  out.e_bath_avg = full_mean;

  if (mode == BathAverage::full_interval) {
    if (!(full_mean >= kMinMeanBathEnergy)) {
      out.defined = false;
      return out;
    }
    for (std::size_t k = 0; k < n; ++k) out.sigma[k] = std::sqrt(deviation_sq[k]) / full_mean;
    return out;
  }

  bool any_defined = false;
  for (std::size_t k = 0; k < n; ++k) {
    const double elapsed = times[k] - times[0];
    const double mean = elapsed > 0.0 ? integral[k] / elapsed : bath_energy[0];
    if (mean >= kMinMeanBathEnergy) {
      out.sigma[k] = std::sqrt(deviation_sq[k]) / mean;
      any_defined = true;
    }
  }
  out.defined = any_defined;
  return out;
}

void apply_relative_deviation(Trajectory& trajectory, BathAverage mode) {
  const std::size_t n = trajectory.records.size();
  std::vector<double> t(n), dsq(n), eb(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = trajectory.records[k].t;
    dsq[k] = trajectory.records[k].deviation_sq;
    eb[k] = trajectory.records[k].e_bath;
  }
  const SigmaSeries series = relative_deviation(t, dsq, eb, mode);
  for (std::size_t k = 0; k < n; ++k) trajectory.records[k].sigma = series.sigma[k];
  trajectory.mean_bath_energy = series.e_bath_avg;
  trajectory.sigma_defined = series.defined;
  if (!series.defined) {
    trajectory.warnings.emplace_back("mean bath energy vanishes; sigma reported as NaN");
  }
}

}  // namespace sbtdvp
