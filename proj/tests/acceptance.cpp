// Acceptance suite. One PASS/FAIL line per criterion; a criterion name on the
// command line runs just that one. Exit status is nonzero if any selected
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sbtdvp/analysis.hpp"
#include "sbtdvp/deviation.hpp"
#include "sbtdvp/driver.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/oracle.hpp"

using namespace sbtdvp;

namespace {

constexpr std::size_t kDeskModes = 2000;
constexpr std::size_t kFullModes = 20000;
constexpr double kOmegaMax = 4.0;
constexpr double kDt = 0.01;
// Five bare Rabi periods at delta = 0.1 (10 pi / delta = 314.2), rounded up.
constexpr double kLongWindow = 320.0;
// Coupling scale where the delocalized-localized crossover sits for s = 0.25.
constexpr double kAlphaC = 0.022;

struct Result {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok) { pass = pass && ok; }
};

struct Series {
  std::vector<double> t, p_z, entropy, sigma, e_total, e_bath, norm;
};

Series columns(const Trajectory& tr) {
  Series s;
  for (const auto& r : tr.records) {
    s.t.push_back(r.t);
    s.p_z.push_back(r.p_z);
    s.entropy.push_back(r.entropy);
    s.sigma.push_back(r.sigma);
    s.e_total.push_back(r.e_total);
    s.e_bath.push_back(r.e_bath);
    s.norm.push_back(r.norm);
  }
  return s;
}

Trajectory simulate(SpectralParams sp, std::size_t modes, double delta, InitialCondition ic,
                    double t_max, bool sigma = false, std::size_t record_every = 10) {
  const DiscreteBath bath(sp, modes, kOmegaMax);
  IntegratorConfig cfg;
  cfg.dt = kDt;
  cfg.t_max = t_max;
  cfg.record_every = record_every;
  cfg.compute_sigma = sigma;
  return integrate(init_state(ic, bath), bath, delta, cfg);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// --- exactness limits ------------------------------------------------------

Result exactness() {
  Result r;
  const double delta = 0.1;

  // no coupling: bare Rabi oscillation over 50 / delta
  {
    const auto s = columns(simulate({0.25, 0.0, 1.0}, kDeskModes, delta, InitialCondition::factorized,
                                    50.0 / delta));
    double err = 0.0;
    for (std::size_t k = 0; k < s.t.size(); ++k) err = std::max(err, std::abs(s.p_z[k] - std::cos(delta * s.t[k])));
    r.require(err < 1e-6);
    r.detail << "alpha=0: max|P_z-cos| = " << err;
  }

  // no tunneling: independent-boson solution, sigma identically zero
  for (auto ic : {InitialCondition::factorized, InitialCondition::polarized}) {
    const SpectralParams sp{0.25, 0.1, 1.0};
    const DiscreteBath bath(sp, kDeskModes, kOmegaMax);
    const auto tr = simulate(sp, kDeskModes, 0.0, ic, 40.0, true);
    double pz = 0.0, eb = 0.0, sig = 0.0;
    for (const auto& rec : tr.records) {
      double exact = 0.0;
      for (std::size_t l = 0; l < bath.size(); ++l) {
        const double w = bath.omega(l), lam = bath.lambda(l);
        exact += ic == InitialCondition::factorized ? lam * lam / (2.0 * w) * (1.0 - std::cos(w * rec.t))
                                                    : lam * lam / (4.0 * w);
      }
      pz = std::max(pz, std::abs(rec.p_z - 1.0));
      eb = std::max(eb, std::abs(rec.e_bath - exact));
      sig = std::max(sig, std::abs(rec.sigma));
    }
    r.require(tr.sigma_defined && pz < 1e-8 && eb < 1e-8 && sig < 1e-8);
    r.detail << "; delta=0 " << to_string(ic) << ": |P_z-1| = " << pz << ", |E_bath-exact| = " << eb
             << ", max sigma = " << sig;
  }
  return r;
}

// --- conservation ----------------------------------------------------------

Result conservation() {
  Result r;
  const double delta = 0.1;
  double worst_norm = 0.0, worst_energy = 0.0;
  for (double s : {0.25, 0.5}) {
    for (double alpha : {0.05, 0.2}) {
      for (auto ic : {InitialCondition::factorized, InitialCondition::polarized}) {
        const auto c = columns(simulate({s, alpha, 1.0}, kDeskModes, delta, ic, 40.0, false, 1));
        const double e0 = c.e_total.front();
        // The factorized start has <H> = 0 exactly, so drift is measured against
        // the larger of |E0| and the bare tunneling scale delta / 2.
        const double scale = std::max(std::abs(e0), 0.5 * delta);
        double dn = 0.0, de = 0.0;
        for (std::size_t k = 0; k < c.t.size(); ++k) {
          dn = std::max(dn, std::abs(c.norm[k] - 1.0));
          de = std::max(de, std::abs(c.e_total[k] - e0) / scale);
        }
        worst_norm = std::max(worst_norm, dn);
        worst_energy = std::max(worst_energy, de);
      }
    }
  }
  r.require(worst_norm < 1e-8 && worst_energy < 1e-6);
  r.detail << "8 runs: max norm drift = " << worst_norm << ", max relative energy drift = " << worst_energy;
  return r;
}

// --- oracle equivalence ----------------------------------------------------

Result oracle_equivalence() {
  Result r;
  OracleCheckConfig cfg;  // 3 modes, n_max 24, delta 0.2, omega_max 3, t in [0, 5]
  cfg.spectral = {0.25, 0.1, 1.0};
  const DiscreteBath bath(cfg.spectral, cfg.n_modes, cfg.omega_max);
  double max_shift = 0.0;
  for (std::size_t l = 0; l < bath.size(); ++l) max_shift = std::max(max_shift, bath.lambda(l) / (2.0 * bath.omega(l)));
  r.require(max_shift <= 0.3);
  r.detail << "max lambda/2w = " << max_shift;

  for (auto ic : {InitialCondition::factorized, InitialCondition::polarized}) {
    cfg.initial_condition = ic;
    const auto rep = oracle_check(cfg);
    r.require(rep.max_p_z_error < 1e-2 && rep.deviation_samples >= 20 && rep.max_deviation_rel_error < 1e-6);
    r.detail << "; " << to_string(ic) << ": max|dP_z| = " << rep.max_p_z_error << ", <d|d> rel err "
             << rep.max_deviation_rel_error << " on " << rep.deviation_samples << " trajectory points";
  }

  // random state / derivative pairs, displacements up to 1
  const auto sys = oracle::build_hamiltonian(bath, cfg.n_max, cfg.delta);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rc = [&](double scale) { return cplx(scale * u(rng), scale * u(rng)); };
  double worst = 0.0;
  const int pairs = 120;
  for (int k = 0; k < pairs; ++k) {
    VariationalState st;
    const double theta = 0.75 * (1.0 + u(rng));
    st.a = std::polar(std::cos(theta), M_PI * u(rng));
    st.b = std::polar(std::sin(theta), M_PI * u(rng));
    StateDerivative d;
    d.da = rc(1.0);
    d.db = rc(1.0);
    for (std::size_t l = 0; l < bath.size(); ++l) {
      st.f.push_back(rc(0.7));
      st.g.push_back(rc(0.7));
      d.df.push_back(rc(1.0));
      d.dg.push_back(rc(1.0));
    }
    const double closed = deviation_norm_squared(st, d, bath, cfg.delta);
    const double brute = oracle::exact_deviation(sys, st, d).delta_norm_sq;
    worst = std::max(worst, std::abs(closed - brute) / brute);
  }
  r.require(worst < 1e-6);
  r.detail << "; " << pairs << " random pairs: max rel err " << worst;
  return r;
}

// --- coherent-incoherent transition ----------------------------------------

Result transition() {
  Result r;
  const double delta = 0.1;
  for (auto [alpha, expect] : {std::pair{0.05, Coherence::coherent}, std::pair{0.2, Coherence::incoherent}}) {
    const auto s = columns(simulate({0.25, alpha, 1.0}, kFullModes, delta, InitialCondition::factorized, kLongWindow));
    const auto c = classify_dynamics(s.t, s.p_z, delta);
    r.require(c.verdict == expect);
    r.detail << (alpha == 0.05 ? "" : "; ") << "alpha=" << alpha << ": " << to_string(c.verdict) << " ("
             << c.extrema.size() << " extrema)";
  }
  return r;
}

// --- strong-coupling coherence under polarization ---------------------------

Result strong_coupling() {
  Result r;
  const double delta = 0.1;
  double first_min[2], peak[2];
  int i = 0;
  for (double alpha : {0.1, 0.3}) {
    const auto s = columns(simulate({0.25, alpha, 1.0}, kFullModes, delta, InitialCondition::polarized, kLongWindow));
    const auto c = classify_dynamics(s.t, s.p_z, delta);
    if (alpha == 0.3) r.require(c.verdict == Coherence::coherent);
    first_min[i] = first_minimum_time(s.t, s.p_z);
    peak[i] = spectral_peak_frequency(s.t, s.p_z, 0.02, 3.0, 3000);
    r.detail << (i ? "; " : "") << "alpha=" << alpha << ": " << to_string(c.verdict) << " ("
             << c.extrema.size() << " extrema), first minimum t = " << first_min[i]
             << ", spectral peak w = " << peak[i];
    ++i;
  }
  // frequency ordering by first-minimum time; the spectral peak is reported alongside
  r.require(first_min[1] < first_min[0]);
  return r;
}

// --- deviation ordering in s ------------------------------------------------

Result deviation_order() {
  Result r;
  const double delta = 0.2;
  const double t_max = IntegratorConfig{}.t_max;
  bool any = false;
  for (double alpha : {0.2, 0.5}) {
    std::vector<double> sat;
    for (double s : {0.25, 0.5, 0.75, 1.0}) {
      const auto c = columns(simulate({s, alpha, 1.0}, kDeskModes, delta, InitialCondition::factorized, t_max, true));
      sat.push_back(steady_value(c.t, c.sigma));
    }
    // strict: no later value may be <= an earlier neighbour
    const bool increasing = std::is_sorted(sat.begin(), sat.end(), std::less_equal<>{});
    any = any || increasing;
    r.detail << (alpha == 0.2 ? "" : "; ") << "alpha=" << alpha << " sigma_sat(s=.25,.5,.75,1) = ";
    for (std::size_t k = 0; k < sat.size(); ++k) r.detail << (k ? ", " : "") << sat[k];
    r.detail << (increasing ? " increasing" : " not increasing")
             << (sat.front() < sat.back() ? " (s=.25 below s=1)" : " (s=.25 not below s=1)");
  }
  r.require(any);
  return r;
}

// --- entropy ----------------------------------------------------------------

Result entropy_behaviour() {
  Result r;
  const double delta = 0.1;
  const std::vector<double> alphas{0.01, 0.05, 0.07, 0.1, 0.15, 0.2, 0.3};
  std::vector<double> steady;
  double s0 = 0.0, s_max = 0.0;
  for (double alpha : alphas) {
    const auto c = columns(simulate({0.25, alpha, 1.0}, kDeskModes, delta, InitialCondition::factorized, kLongWindow));
    s0 = std::max(s0, std::abs(c.entropy.front()));
    s_max = std::max(s_max, max_abs(c.entropy));
    steady.push_back(steady_value(c.t, c.entropy));
  }
  const auto best = static_cast<std::size_t>(std::max_element(steady.begin(), steady.end()) - steady.begin());
  const std::size_t target = 2;  // alpha = 0.07
  const bool interior = best > 0 && best + 1 < alphas.size();
  const bool near = best + 1 >= target && best <= target + 1;
  r.require(s0 == 0.0 && s_max <= std::log(2.0) + 1e-12 && interior && near);
  r.detail << "S(0) = " << s0 << ", max S - ln2 = " << s_max - std::log(2.0) << "; steady S = ";
  for (std::size_t k = 0; k < alphas.size(); ++k) r.detail << (k ? ", " : "") << alphas[k] << ":" << steady[k];
  r.detail << "; maximum at alpha = " << alphas[best];
  return r;
}

// --- initial-condition contrast -------------------------------------------

Result initial_conditions() {
  Result r;
  const double delta = 0.1;
  double polarized_steady[2];
  int i = 0;
  for (double factor : {0.9, 1.3}) {
    const double alpha = factor * kAlphaC;
    double steady[2];
    int j = 0;
    for (auto ic : {InitialCondition::factorized, InitialCondition::polarized}) {
      const auto c = columns(simulate({0.25, alpha, 1.0}, kFullModes, delta, ic, kLongWindow));
      steady[j++] = steady_value(c.t, c.p_z);
    }
    r.require(steady[1] > steady[0]);
    polarized_steady[i++] = steady[1];
    r.detail << (factor == 0.9 ? "" : "; ") << "alpha=" << alpha << ": steady P_z factorized " << steady[0]
             << ", polarized " << steady[1];
  }
  r.require(polarized_steady[1] > polarized_steady[0]);
  return r;
}

// --- performance ------------------------------------------------------------

struct StepBench {
  DiscreteBath bath;
  VariationalState state;
  Rk4Stepper stepper;
  int steps;

  StepBench(std::size_t modes, int steps_per_rep)
      : bath({0.25, 0.1, 1.0}, modes, kOmegaMax),
        state(init_state(InitialCondition::polarized, bath)),
        stepper(bath, 0.1, 1e-8),
        steps(steps_per_rep) {
    state.a = std::sqrt(0.5);
    state.b = std::sqrt(0.5);
    for (int k = 0; k < steps; ++k) stepper.step(state, kDt);  // warm caches
  }

  double seconds_per_step() {
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < steps; ++k) stepper.step(state, kDt);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / steps;
  }
};

Result performance() {
  Result r;
  // Same total work per repetition; sizes interleaved so background load hits both alike.
  StepBench small(kDeskModes, 1000), large(kFullModes, 100);
  double t_small = INFINITY, t_large = INFINITY;
  for (int rep = 0; rep < 15; ++rep) {
    t_small = std::min(t_small, small.seconds_per_step());
    t_large = std::min(t_large, large.seconds_per_step());
  }
  const double per_mode_ratio = (t_large / kFullModes) / (t_small / kDeskModes);
  r.require(t_large < 5e-3 && per_mode_ratio > 0.8 && per_mode_ratio < 1.2);
  r.detail << "step time " << t_small * 1e3 << " ms at N_b=2000, " << t_large * 1e3
           << " ms at N_b=20000; per-mode cost ratio " << per_mode_ratio;
  return r;
}

struct Criterion {
  const char* name;
  Result (*run)();
};

const Criterion kCriteria[] = {
    {"exactness", exactness},
    {"conservation", conservation},
    {"oracle", oracle_equivalence},
    {"transition", transition},
    {"strong_coupling", strong_coupling},
    {"deviation_order", deviation_order},
    {"entropy", entropy_behaviour},
    {"initial_conditions", initial_conditions},
    {"performance", performance},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0, ran = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Result res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail << "exception: " << e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %-18s %s [%.1f s]\n", res.pass ? "PASS" : "FAIL", c.name, res.detail.str().c_str(), wall);
    std::fflush(stdout);
    failures += !res.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
