#include "sbtdvp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sbtdvp/deviation.hpp"

namespace sbtdvp {

namespace {

// -i z
inline cplx times_minus_i(cplx z) { return {z.imag(), -z.real()}; }

// Mode sums: |f|^2, |g|^2, f^* g, lambda Re f, lambda Re g.
struct ModeSums {
  double sff = 0.0, sgg = 0.0, fg_re = 0.0, fg_im = 0.0, lf = 0.0, lg = 0.0;

  void add(double lam, cplx f, cplx g) {
    const double fr = f.real(), fi = f.imag();
    const double gr = g.real(), gi = g.imag();
    sff += fr * fr + fi * fi;
    sgg += gr * gr + gi * gi;
    fg_re += fr * gr + fi * gi;
    fg_im += fr * gi - fi * gr;
    lf += lam * fr;
    lg += lam * gr;
  }
};

// Everything in the equations of motion that is not per-mode.
struct Couplings {
  cplx cf, cg;  // (delta/2)(B/A) e^E and (delta/2)(A/B) e^E*
  cplx da, db;
  bool regularized = false;
};

Couplings couplings(const ModeSums& m, cplx a, cplx b, double delta, double epsilon_amp) {
  const cplx sum_fg{m.fg_re, m.fg_im};
  const cplx overlap = std::exp(sum_fg - 0.5 * (m.sff + m.sgg));

  const double pa = std::norm(a);
  const double pb = std::norm(b);
  const double eps2 = epsilon_amp * epsilon_amp;
  const cplx ratio_ba = b * std::conj(a) / std::max(pa, eps2);
  const cplx ratio_ab = a * std::conj(b) / std::max(pb, eps2);

  const double half_delta = 0.5 * delta;
  Couplings c;
  c.regularized = pa < eps2 || pb < eps2;
  c.cf = half_delta * ratio_ba * overlap;
  c.cg = half_delta * ratio_ab * std::conj(overlap);

  // With the f, g equations substituted into the amplitude equations:
  //   i dA = A [ sum lambda Re f / 2 - (delta/2) Re((B/A) e^E S_f) ] - (delta/2) B e^E
  //   i dB = B [-sum lambda Re g / 2 - (delta/2) Re((A/B) e^E* S_g) ] - (delta/2) A e^E*
  // with S_f = sum (|f|^2 - f^* g) and S_g = sum (|g|^2 - g^* f).
  const cplx s_f = m.sff - sum_fg;
  const cplx s_g = m.sgg - std::conj(sum_fg);
  const double a_diag = 0.5 * m.lf - (c.cf * s_f).real();
  const double b_diag = -0.5 * m.lg - (c.cg * s_g).real();
  c.da = times_minus_i(a * a_diag - half_delta * b * overlap);
  c.db = times_minus_i(b * b_diag - half_delta * a * std::conj(overlap));
  return c;
}

// i df = lambda/2 + w f + cf (f - g);  i dg = -lambda/2 + w g + cg (g - f)
inline void mode_rates(double w, double lam, cplx f, cplx g, const Couplings& c, cplx& df,
                       cplx& dg) {
  const double fr = f.real(), fi = f.imag();
  const double gr = g.real(), gi = g.imag();
  const double dr = fr - gr, di = fi - gi;
  const double hl = 0.5 * lam;
  const double cfr = c.cf.real(), cfi = c.cf.imag();
  const double cgr = c.cg.real(), cgi = c.cg.imag();
  const double rf_re = hl + w * fr + (cfr * dr - cfi * di);
  const double rf_im = w * fi + (cfr * di + cfi * dr);
  const double rg_re = -hl + w * gr - (cgr * dr - cgi * di);
  const double rg_im = w * gi - (cgr * di + cgi * dr);
  df = {rf_im, -rf_re};
  dg = {rg_im, -rg_re};
}

ModeSums mode_sums(const DiscreteBath& bath, const std::vector<cplx>& f,
                   const std::vector<cplx>& g) {
  ModeSums m;
  const double* lam = bath.lambdas().data();
  for (std::size_t l = 0; l < f.size(); ++l) m.add(lam[l], f[l], g[l]);
  return m;
}

}  // namespace

void eom_rhs(const VariationalState& state, const DiscreteBath& bath, double delta,
             double epsilon_amp, StateDerivative& out) {
  const std::size_t n = state.f.size();
  if (state.g.size() != n || bath.size() != n) {
    throw std::invalid_argument("eom_rhs: state and bath mode counts differ");
  }
  out.df.resize(n);
  out.dg.resize(n);

  const Couplings c = couplings(mode_sums(bath, state.f, state.g), state.a, state.b, delta, epsilon_amp);
  const double* w = bath.omegas().data();
  const double* lam = bath.lambdas().data();
  for (std::size_t l = 0; l < n; ++l) mode_rates(w[l], lam[l], state.f[l], state.g[l], c, out.df[l], out.dg[l]);
  out.da = c.da;
  out.db = c.db;
  out.regularized = c.regularized;
}

StateDerivative eom_rhs(const VariationalState& state, const DiscreteBath& bath, double delta,
                        double epsilon_amp) {
  StateDerivative out;
  eom_rhs(state, bath, delta, epsilon_amp, out);
  return out;
}

void IntegratorConfig::validate(const DiscreteBath& bath) const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
  if (!(dt * bath.omega_max() < 0.5)) {
    std::ostringstream msg;
    msg << "dt * omega_max = " << dt * bath.omega_max() << " must be < 0.5";
    throw std::invalid_argument(msg.str());
  }
  if (!(epsilon_amp >= 0.0)) throw std::invalid_argument("epsilon_amp must be >= 0");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (!(norm_tolerance > 0.0)) throw std::invalid_argument("norm_tolerance must be > 0");
}

Rk4Stepper::Rk4Stepper(const DiscreteBath& bath, double delta, double epsilon_amp)
    : bath_(bath), delta_(delta), epsilon_amp_(epsilon_amp) {
  const std::size_t n = bath.size();
  stage_f_.resize(n);
  stage_g_.resize(n);
  acc_f_.resize(n);
  acc_g_.resize(n);
}

// Each stage is a single pass over the modes: it evaluates the rates at the
// current stage, writes the next stage and the running RK4 sum, and collects
// the mode sums the next stage needs. Three arrays stay live instead of six,
// which keeps large baths close to cache-resident.
std::size_t Rk4Stepper::step(VariationalState& y, double dt) {
  const std::size_t n = y.f.size();
  if (y.g.size() != n || bath_.size() != n) {
    throw std::invalid_argument("Rk4Stepper: state and bath mode counts differ");
  }
  const double* w = bath_.omegas().data();
  const double* lam = bath_.lambdas().data();
  cplx* yf = y.f.data();
  cplx* yg = y.g.data();
  cplx* sf = stage_f_.data();
  cplx* sg = stage_g_.data();
  cplx* af = acc_f_.data();
  cplx* ag = acc_g_.data();

  const double half = 0.5 * dt;
  const double c1 = dt / 6.0;
  const double c2 = dt / 3.0;
  std::size_t events = 0;

  // k1 at y
  Couplings c = couplings(mode_sums(bath_, y.f, y.g), y.a, y.b, delta_, epsilon_amp_);
  events += c.regularized;
  ModeSums next;
  for (std::size_t l = 0; l < n; ++l) {
    cplx kf, kg;
    mode_rates(w[l], lam[l], yf[l], yg[l], c, kf, kg);
    sf[l] = yf[l] + half * kf;
    sg[l] = yg[l] + half * kg;
    af[l] = yf[l] + c1 * kf;
    ag[l] = yg[l] + c1 * kg;
    next.add(lam[l], sf[l], sg[l]);
  }
  cplx stage_a = y.a + half * c.da, stage_b = y.b + half * c.db;
  cplx acc_a = y.a + c1 * c.da, acc_b = y.b + c1 * c.db;

  // k2 and k3; the stage arrays are overwritten in place
  for (const double h : {half, dt}) {
    c = couplings(next, stage_a, stage_b, delta_, epsilon_amp_);
    events += c.regularized;
    next = ModeSums{};
    for (std::size_t l = 0; l < n; ++l) {
      cplx kf, kg;
      mode_rates(w[l], lam[l], sf[l], sg[l], c, kf, kg);
      sf[l] = yf[l] + h * kf;
      sg[l] = yg[l] + h * kg;
      af[l] += c2 * kf;
      ag[l] += c2 * kg;
      next.add(lam[l], sf[l], sg[l]);
    }
    stage_a = y.a + h * c.da;
    stage_b = y.b + h * c.db;
    acc_a += c2 * c.da;
    acc_b += c2 * c.db;
  }

  // k4 closes the sum
  c = couplings(next, stage_a, stage_b, delta_, epsilon_amp_);
  events += c.regularized;
  for (std::size_t l = 0; l < n; ++l) {
    cplx kf, kg;
    mode_rates(w[l], lam[l], sf[l], sg[l], c, kf, kg);
    yf[l] = af[l] + c1 * kf;
    yg[l] = ag[l] + c1 * kg;
  }
  y.a = acc_a + c1 * c.da;
  y.b = acc_b + c1 * c.db;
  y.t += dt;
  return events;
}

Trajectory integrate(const VariationalState& initial, const DiscreteBath& bath, double delta,
                     const IntegratorConfig& config, const TrajectoryCallbacks& callbacks) {
  config.validate(bath);
  if (initial.f.size() != bath.size() || initial.g.size() != bath.size()) {
    throw std::invalid_argument("integrate: initial state does not match the bath mode count");
  }
  const double norm0 = initial.norm();
  if (std::abs(norm0 - 1.0) > 1e-10) {
    throw std::invalid_argument("integrate: initial state is not normalized");
  }

  Trajectory traj;
  auto warn = [&](std::string text) {
    if (callbacks.on_warning) callbacks.on_warning(text);
    traj.warnings.push_back(std::move(text));
  };
  if (config.t_max >= bath.recurrence_time()) {
    std::ostringstream msg;
    msg << "t_max = " << config.t_max << " reaches the recurrence time "
        << bath.recurrence_time();
    warn(msg.str());
  }

  VariationalState y = initial;
  Rk4Stepper stepper(bath, delta, config.epsilon_amp);
  StateDerivative record_derivative;

  auto record = [&]() {
    ObservableRecord rec = make_record(y, bath, delta);
    if (config.compute_sigma) {
      eom_rhs(y, bath, delta, config.epsilon_amp, record_derivative);
      rec.deviation_sq = deviation_norm_squared(y, record_derivative, bath, delta);
    }
    if (callbacks.on_record) callbacks.on_record(rec);
    traj.records.push_back(rec);
  };

  // Full steps land exactly on k * dt; a shorter final step reaches t_max.
  const double ratio = config.t_max / config.dt;
  auto full_steps = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  const bool partial = ratio - static_cast<double>(full_steps) > 1e-9;
  const std::size_t total_steps = full_steps + (partial ? 1 : 0);

  record();
  bool reported_regularization = false;
  for (std::size_t k = 1; k <= total_steps; ++k) {
    const double h = (k <= full_steps) ? config.dt : config.t_max - y.t;
    const std::size_t events = stepper.step(y, h);
    y.t = (k <= full_steps) ? static_cast<double>(k) * config.dt : config.t_max;
    traj.regularization_events += events;
    if (events > 0 && !reported_regularization) {
      std::ostringstream msg;
      msg << "amplitude regularization active near t = " << y.t - h;
      warn(msg.str());
      reported_regularization = true;
    }

    const double norm = y.norm();
    if (!std::isfinite(norm) || std::abs(norm - norm0) > config.norm_tolerance) {
      std::ostringstream msg;
      msg << "norm drift " << norm - norm0 << " exceeds " << config.norm_tolerance
          << " at t = " << y.t;
      throw NumericalFailure(msg.str(), y.t);
    }
    if (k % config.record_every == 0 || k == total_steps) record();
  }
  traj.steps = total_steps;
  if (traj.regularization_events > 0) {
    std::ostringstream msg;
    msg << traj.regularization_events << " RHS evaluations hit the amplitude floor";
    warn(msg.str());
  }
  traj.final_state = std::move(y);

  if (config.compute_sigma) apply_relative_deviation(traj, config.bath_average);
  return traj;
}

}  // namespace sbtdvp
