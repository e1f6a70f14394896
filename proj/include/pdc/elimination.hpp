#pragma once

// Numeric adiabatic elimination of the qubit.
//
// The generator S solves [H0, S] = -HI exactly. The transformed Hamiltonian is
// expanded as H0 + 1/2 [HI, S] + 1/3 [[HI, S], S], projected onto the qubit
// ground state and compared term by term with the closed-form effective model.

#include "pdc/fock.hpp"
#include "pdc/model.hpp"

#include <string>
#include <vector>

namespace pdc {

struct GeneratorS {
  Operator op;          ///< anti-Hermitian, full space, angular units cancel (dimensionless)
  Complex coeff_ge;     ///< multiplies a† |g><e|
  Complex coeff_re;     ///< multiplies b† |r><e|
  Complex coeff_gr;     ///< multiplies b† |g><r|
};

/// Throws invalid-argument naming the vanishing denominator (delta, delta_r,
/// or delta - delta_r).
GeneratorS build_generator(const SystemParams& p, const HilbertSpec& s);

struct DroppedTerm {
  std::string pattern;  ///< e.g. "(a†)^0 b^0 nonlinear" or "a^1 (b†)^2"
  double magnitude;     ///< Frobenius norm of the residual block, Hz
};

struct EliminationReport {
  Complex extracted_chi_half;    ///< coefficient of a†b², Hz
  double extracted_shift_a = 0;  ///< Hz
  double extracted_shift_b = 0;  ///< Hz
  Complex closed_form_chi_half;  ///< (chi/2) e^{i phi_eff}, Hz
  double relative_deviation = 0;
  std::vector<DroppedTerm> dropped_terms;
};

struct ProjectedModel {
  Operator h_eff;  ///< two-mode operator <g|M|g>, angular units
  EliminationReport report;
};

ProjectedModel project_effective(const SystemParams& p, const HilbertSpec& s);

struct SpectralPair {
  Index excitation;  ///< K sector
  double exact_hz;
  double effective_hz;
  double gap_hz;  ///< exact - effective
};

/// Lowest k ground-dominated eigenvalues of H0 + HI against the eigenvalues of
/// the projected effective operator, sector by excitation number K.
std::vector<SpectralPair> spectral_check(const SystemParams& p, const HilbertSpec& s, Index k);

}  // namespace pdc
