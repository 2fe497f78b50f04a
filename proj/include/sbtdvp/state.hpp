#pragma once

#include <complex>
#include <limits>
#include <string_view>
#include <vector>

#include "sbtdvp/bath.hpp"

namespace sbtdvp {

using cplx = std::complex<double>;

enum class InitialCondition { factorized, polarized };

std::string_view to_string(InitialCondition ic);
InitialCondition parse_initial_condition(std::string_view text);

/// |D> = A |+> |f> + B |-> |g>, with |f>, |g> normalized multimode coherent states.
struct VariationalState {
  cplx a{1.0, 0.0};
  cplx b{0.0, 0.0};
  std::vector<cplx> f;
  std::vector<cplx> g;
  double t = 0.0;

  std::size_t modes() const { return f.size(); }
  double norm() const { return std::norm(a) + std::norm(b); }
};

/// Spin in |+>; bath in vacuum (factorized) or displaced to -lambda/(2w) (polarized).
VariationalState init_state(InitialCondition condition, const DiscreteBath& bath);

/// log <f|g> = sum_l [f_l^* g_l - (|f_l|^2 + |g_l|^2)/2]. Real part is never positive.
cplx overlap_exponent(const VariationalState& state);

/// sum_l |f_l - g_l|^2.
double displacement_distance_sq(const VariationalState& state);

struct SpinExpectations {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

SpinExpectations observables(const VariationalState& state);

/// Eigenvalues of the reduced spin density matrix, larger first.
struct ReducedSpectrum {
  double plus = 1.0;
  double minus = 0.0;
};

/// Throws std::logic_error when the discriminant is negative beyond roundoff.
ReducedSpectrum reduced_spectrum(const VariationalState& state);

/// Von Neumann entropy of the spin in nats, using 0 ln 0 = 0.
double entropy(const VariationalState& state);

/// Binary entropy of a two-level spectrum, shared with the exact oracle.
double two_level_entropy(double p_plus, double p_minus);

double total_energy(const VariationalState& state, const DiscreteBath& bath, double delta);

/// sum_l w_l (|A|^2 |f_l|^2 + |B|^2 |g_l|^2)
double bath_energy(const VariationalState& state, const DiscreteBath& bath);

/// One output row. sigma is NaN when the deviation is not computed or undefined.
struct ObservableRecord {
  double t = 0.0;
  double p_x = 0.0;
  double p_y = 0.0;
  double p_z = 0.0;
  double entropy = 0.0;
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double e_total = 0.0;
  double e_bath = 0.0;
  double norm = 0.0;
  /// <delta|delta> at this time; NaN unless the deviation is computed.
  double deviation_sq = std::numeric_limits<double>::quiet_NaN();
};

ObservableRecord make_record(const VariationalState& state, const DiscreteBath& bath, double delta);

}  // namespace sbtdvp
