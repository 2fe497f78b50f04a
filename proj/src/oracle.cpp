#include "sbtdvp/oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sbtdvp::oracle {

namespace {

constexpr double kRenormalizeBelow = 1e-8;

std::size_t checked_power(std::size_t base, std::size_t exponent, std::size_t cap) {
  std::size_t result = 1;
  for (std::size_t i = 0; i < exponent; ++i) {
    if (result > cap / base) return cap + 1;
    result *= base;
  }
  return result;
}

// Per-mode truncated coherent amplitudes e^{-|z|^2/2} z^n / sqrt(n!), n = 0..n_max.
std::vector<cplx> coherent_amplitudes(cplx z, std::size_t n_max) {
  std::vector<cplx> c(n_max + 1);
  c[0] = std::exp(-0.5 * std::norm(z));
  for (std::size_t n = 1; n <= n_max; ++n) c[n] = c[n - 1] * z / std::sqrt(static_cast<double>(n));
  return c;
}

// d/dt of coherent_amplitudes for z(t) with rate zdot:
//   dc_n = e^{-|z|^2/2} n z^{n-1}/sqrt(n!) zdot - Re(z^* zdot) c_n
std::vector<cplx> coherent_amplitude_rates(cplx z, cplx zdot, std::size_t n_max) {
  const std::vector<cplx> c = coherent_amplitudes(z, n_max);
  std::vector<cplx> dc(n_max + 1);
  const double kappa = (std::conj(z) * zdot).real();
  // n z^{n-1}/sqrt(n!) = sqrt(n) * z^{n-1}/sqrt((n-1)!)
  dc[0] = -kappa * c[0];
  for (std::size_t n = 1; n <= n_max; ++n) {
    dc[n] = std::sqrt(static_cast<double>(n)) * c[n - 1] * zdot - kappa * c[n];
  }
  return dc;
}

// Tensor product of per-mode amplitude vectors in the mixed-radix bath index.
FockVector tensor_product(const std::vector<std::vector<cplx>>& factors, std::size_t bath_dim) {
  const std::size_t radix = factors.front().size();
  FockVector out(static_cast<Eigen::Index>(bath_dim));
  for (std::size_t idx = 0; idx < bath_dim; ++idx) {
    std::size_t rest = idx;
    cplx amp{1.0, 0.0};
    for (const auto& factor : factors) {
      amp *= factor[rest % radix];
      rest /= radix;
    }
    out[static_cast<Eigen::Index>(idx)] = amp;
  }
  return out;
}

struct Component {
  FockVector vector;
  double defect = 0.0;
};

Component embed_coherent(const FockSystem& sys, const std::vector<cplx>& z, bool renormalize) {
  std::vector<std::vector<cplx>> factors;
  factors.reserve(z.size());
  for (cplx zl : z) factors.push_back(coherent_amplitudes(zl, sys.n_max));
  Component comp{tensor_product(factors, sys.bath_dim), 0.0};
  const double captured = comp.vector.squaredNorm();
  comp.defect = std::max(0.0, 1.0 - captured);
  if (renormalize && comp.defect < kRenormalizeBelow && captured > 0.0) {
    comp.vector /= std::sqrt(captured);
  }
  return comp;
}

FockVector coherent_rate(const FockSystem& sys, const std::vector<cplx>& z,
                         const std::vector<cplx>& zdot) {
  const std::size_t n = z.size();
  std::vector<std::vector<cplx>> amps(n), rates(n);
  for (std::size_t l = 0; l < n; ++l) {
    amps[l] = coherent_amplitudes(z[l], sys.n_max);
    rates[l] = coherent_amplitude_rates(z[l], zdot[l], sys.n_max);
  }
  FockVector out = FockVector::Zero(static_cast<Eigen::Index>(sys.bath_dim));
  for (std::size_t l = 0; l < n; ++l) {
    std::vector<std::vector<cplx>> factors = amps;
    factors[l] = rates[l];
    out += tensor_product(factors, sys.bath_dim);
  }
  return out;
}

void check_size(const FockSystem& sys, const VariationalState& state) {
  if (state.f.size() != sys.bath.size() || state.g.size() != sys.bath.size()) {
    throw std::invalid_argument("oracle: state mode count does not match the Fock system");
  }
}

}  // namespace

FockSystem build_hamiltonian(const DiscreteBath& bath, std::size_t n_max, double delta,
                             const Limits& limits) {
  const std::size_t modes = bath.size();
  if (modes > limits.max_modes) {
    throw std::invalid_argument("build_hamiltonian: " + std::to_string(modes) +
                                " modes exceeds the oracle limit of " +
                                std::to_string(limits.max_modes));
  }
  const std::size_t radix = n_max + 1;
  const std::size_t bath_dim = checked_power(radix, modes, limits.max_dim);
  if (bath_dim > limits.max_dim / 2) {
    throw std::invalid_argument("build_hamiltonian: Hilbert space dimension exceeds the guard of " +
                                std::to_string(limits.max_dim));
  }

  FockSystem sys{bath, n_max, delta, bath_dim, 2 * bath_dim, {}};
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(sys.dim * (2 * modes + 2));

  std::vector<std::size_t> stride(modes);
  for (std::size_t l = 0; l < modes; ++l) stride[l] = l == 0 ? 1 : stride[l - 1] * radix;

  for (int spin = 0; spin < 2; ++spin) {
    const double sz = spin == 0 ? 1.0 : -1.0;
    const std::size_t offset = static_cast<std::size_t>(spin) * bath_dim;
    const std::size_t partner = static_cast<std::size_t>(1 - spin) * bath_dim;
    for (std::size_t idx = 0; idx < bath_dim; ++idx) {
      const auto col = static_cast<Eigen::Index>(offset + idx);
      double diag = 0.0;
      std::size_t rest = idx;
      for (std::size_t l = 0; l < modes; ++l) {
        const std::size_t occ = rest % radix;
        rest /= radix;
        diag += bath.omega(l) * static_cast<double>(occ);
        const double half_coupling = 0.5 * sz * bath.lambda(l);
        if (occ < n_max) {  // b^dag
          const double amp = half_coupling * std::sqrt(static_cast<double>(occ + 1));
          triplets.emplace_back(static_cast<Eigen::Index>(offset + idx + stride[l]), col, amp);
        }
        if (occ > 0) {  // b
          const double amp = half_coupling * std::sqrt(static_cast<double>(occ));
          triplets.emplace_back(static_cast<Eigen::Index>(offset + idx - stride[l]), col, amp);
        }
      }
      if (diag != 0.0) triplets.emplace_back(col, col, diag);
      if (delta != 0.0) {
        triplets.emplace_back(static_cast<Eigen::Index>(partner + idx), col, -0.5 * delta);
      }
    }
  }
  sys.hamiltonian.resize(static_cast<Eigen::Index>(sys.dim), static_cast<Eigen::Index>(sys.dim));
  sys.hamiltonian.setFromTriplets(triplets.begin(), triplets.end());
  sys.hamiltonian.makeCompressed();
  return sys;
}

double hermiticity_error(const FockSystem& system) {
  const SparseHamiltonian adjoint = system.hamiltonian.adjoint();
  const SparseHamiltonian diff = system.hamiltonian - adjoint;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseHamiltonian::InnerIterator it(diff, k); it; ++it) {
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

Embedding embed_state(const FockSystem& system, const VariationalState& state, bool renormalize) {
  check_size(system, state);
  const Component up = embed_coherent(system, state.f, renormalize);
  const Component down = embed_coherent(system, state.g, renormalize);
  const auto m = static_cast<Eigen::Index>(system.bath_dim);
  Embedding e;
  e.vector.resize(static_cast<Eigen::Index>(system.dim));
  e.vector.head(m) = state.a * up.vector;
  e.vector.tail(m) = state.b * down.vector;
  e.truncation_defect = std::max(up.defect, down.defect);
  return e;
}

FockVector embed_derivative(const FockSystem& system, const VariationalState& state,
                            const StateDerivative& derivative) {
  check_size(system, state);
  const Component up = embed_coherent(system, state.f, false);
  const Component down = embed_coherent(system, state.g, false);
  const auto m = static_cast<Eigen::Index>(system.bath_dim);
  FockVector out(static_cast<Eigen::Index>(system.dim));
  out.head(m) = derivative.da * up.vector + state.a * coherent_rate(system, state.f, derivative.df);
  out.tail(m) = derivative.db * down.vector + state.b * coherent_rate(system, state.g, derivative.dg);
  return out;
}

ExactSample measure(const FockSystem& system, const FockVector& psi, double t) {
  const auto m = static_cast<Eigen::Index>(system.bath_dim);
  const auto up = psi.head(m);
  const auto down = psi.tail(m);
  const double p_up = up.squaredNorm();
  const double p_down = down.squaredNorm();
  // rho_{-+} = sum_n psi_-(n) psi_+(n)^*
  const cplx coherence = up.dot(down);

  ExactSample s;
  s.t = t;
  s.norm = p_up + p_down;
  s.p_z = p_up - p_down;
  s.p_x = 2.0 * coherence.real();
  s.p_y = 2.0 * coherence.imag();
  const double trace = s.norm;
  const double radius = std::sqrt(s.p_z * s.p_z + 4.0 * std::norm(coherence));
  // Smaller eigenvalue via the product to avoid cancellation.
  const double larger = 0.5 * (trace + radius);
  const double det = p_up * p_down - std::norm(coherence);
  const double smaller = larger > 0.0 ? std::max(0.0, det / larger) : 0.0;
  s.entropy = two_level_entropy(larger, smaller);
  s.energy = psi.dot(system.hamiltonian * psi).real();

  const std::size_t radix = system.n_max + 1;
  const std::size_t modes = system.bath.size();
  for (std::size_t i = 0; i < system.bath_dim; ++i) {
    const double weight = std::norm(up(static_cast<Eigen::Index>(i))) +
                          std::norm(down(static_cast<Eigen::Index>(i)));
    if (weight == 0.0) continue;
    double quanta = 0.0;
    std::size_t rest = i;
    for (std::size_t l = 0; l < modes; ++l) {
      quanta += system.bath.omega(l) * static_cast<double>(rest % radix);
      rest /= radix;
    }
    s.bath_energy += weight * quanta;
  }
  return s;
}

LanczosPropagator::LanczosPropagator(const SparseHamiltonian& h, std::size_t max_krylov,
                                     double tolerance)
    : h_(h), max_krylov_(max_krylov), tolerance_(tolerance) {}

void LanczosPropagator::step(FockVector& psi, double dt) {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) return;
  basis_.clear();
  basis_.push_back(psi / beta0);
  std::vector<double> alpha, beta;

  Eigen::VectorXcd coeffs;
  for (std::size_t j = 0; j < max_krylov_; ++j) {
    FockVector w = h_ * basis_[j];
    alpha.push_back(basis_[j].dot(w).real());
    // Full reorthogonalization; the Krylov spaces here are short.
    for (const auto& v : basis_) w -= v.dot(w) * v;
    const double b = w.norm();

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXcd phases =
        (eig.eigenvalues().cast<cplx>() * cplx(0.0, -dt)).array().exp();
    const Eigen::VectorXcd first_row = eig.eigenvectors().row(0).transpose().cast<cplx>();
    coeffs = eig.eigenvectors().cast<cplx>() * phases.cwiseProduct(first_row);

    const bool converged = b * std::abs(coeffs[k - 1]) < tolerance_;
    if (converged || b < 1e-14 || j + 1 == max_krylov_) break;
    beta.push_back(b);
    basis_.push_back(w / b);
  }

  FockVector next = FockVector::Zero(psi.size());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) next += coeffs[i] * basis_[static_cast<std::size_t>(i)];
  psi = beta0 * next;
}

ExactTrajectory exact_propagate(const FockSystem& system, InitialCondition condition, double dt,
                                double t_max) {
  if (!(dt > 0.0) || !(t_max >= 0.0)) {
    throw std::invalid_argument("exact_propagate: need dt > 0 and t_max >= 0");
  }
  ExactTrajectory traj;
  const VariationalState initial = init_state(condition, system.bath);
  Embedding emb = embed_state(system, initial, true);
  traj.truncation_defect = emb.truncation_defect;
  if (emb.truncation_defect > kRenormalizeBelow) {
    std::ostringstream msg;
    msg << "initial displacement truncation defect " << emb.truncation_defect
        << " exceeds 1e-8; increase n_max";
    traj.warnings.push_back(msg.str());
  }

  FockVector psi = std::move(emb.vector);
  LanczosPropagator propagator(system.hamiltonian);
  double t = 0.0;
  traj.samples.push_back(measure(system, psi, t));
  std::size_t k = 0;
  while (t < t_max - 1e-12) {
    ++k;
    const double next = std::min(t_max, static_cast<double>(k) * dt);
    propagator.step(psi, next - t);
    t = next;
    traj.samples.push_back(measure(system, psi, t));
  }
  return traj;
}

ExactDeviation exact_deviation(const FockSystem& system, const VariationalState& state,
                               const StateDerivative& derivative) {
  const Embedding d = embed_state(system, state, false);
  const FockVector d_dot = embed_derivative(system, state, derivative);
  const FockVector residual = cplx(0.0, 1.0) * d_dot - system.hamiltonian * d.vector;
  return {residual.squaredNorm(), d.truncation_defect};
}

}  // namespace sbtdvp::oracle
