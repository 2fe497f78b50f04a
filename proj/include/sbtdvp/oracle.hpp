#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <string>
#include <vector>

#include "sbtdvp/bath.hpp"
#include "sbtdvp/dynamics.hpp"
#include "sbtdvp/state.hpp"

namespace sbtdvp::oracle {

using FockVector = Eigen::VectorXcd;
using SparseHamiltonian = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct Limits {
  std::size_t max_modes = 6;
  std::size_t max_dim = 1'000'000;
};

/// Spin-boson Hamiltonian in the product basis |s> (x) |n_1 ... n_N>, with
/// n_l <= n_max. Index = s * bath_dim + sum_l n_l (n_max + 1)^l, s = 0 for |+>.
struct FockSystem {
  DiscreteBath bath;
  std::size_t n_max = 0;
  double delta = 0.0;
  std::size_t bath_dim = 0;
  std::size_t dim = 0;
  SparseHamiltonian hamiltonian;
};

FockSystem build_hamiltonian(const DiscreteBath& bath, std::size_t n_max, double delta,
                             const Limits& limits = {});

/// max |H_ij - conj(H_ji)|
double hermiticity_error(const FockSystem& system);

struct Embedding {
  FockVector vector;
  /// 1 - (norm captured by the truncated space), per coherent component, worst case.
  double truncation_defect = 0.0;
};

/// Embeds A|+>|f> + B|->|g> using the truncated series e^{-|f|^2/2} f^n / sqrt(n!).
/// With `renormalize`, each coherent factor is rescaled when its defect is below 1e-8.
Embedding embed_state(const FockSystem& system, const VariationalState& state,
                      bool renormalize = false);

/// d/dt of the unrenormalized embedding, by the product and chain rules over
/// every variational parameter.
FockVector embed_derivative(const FockSystem& system, const VariationalState& state,
                            const StateDerivative& derivative);

struct ExactSample {
  double t = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;
  double entropy = 0.0;
  double energy = 0.0;
  /// sum_l w_l <n_l>
  double bath_energy = 0.0;
  double norm = 0.0;
};

ExactSample measure(const FockSystem& system, const FockVector& psi, double t = 0.0);

/// Short-iterative Lanczos propagation of exp(-i H dt).
class LanczosPropagator {
 public:
  explicit LanczosPropagator(const SparseHamiltonian& h, std::size_t max_krylov = 60,
                             double tolerance = 1e-13);
  void step(FockVector& psi, double dt);

 private:
  const SparseHamiltonian& h_;
  std::size_t max_krylov_;
  double tolerance_;
  std::vector<FockVector> basis_;
};

struct ExactTrajectory {
  std::vector<ExactSample> samples;
  double truncation_defect = 0.0;
  std::vector<std::string> warnings;
};

/// Samples every dt up to t_max (inclusive, last step shortened if needed).
ExactTrajectory exact_propagate(const FockSystem& system, InitialCondition condition, double dt,
                                double t_max);

struct ExactDeviation {
  double delta_norm_sq = 0.0;
  double truncation_defect = 0.0;
};

/// || i|Ddot> - H|D> ||^2 evaluated on Fock vectors.
ExactDeviation exact_deviation(const FockSystem& system, const VariationalState& state,
                               const StateDerivative& derivative);

}  // namespace sbtdvp::oracle
