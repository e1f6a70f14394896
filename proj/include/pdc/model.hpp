#pragma once

// Physical parameters of the three-level qubit coupled to two resonator
// modes, the closed-form effective quantities, and the Hamiltonian builders.
//
// Public quantities are ordinary frequencies nu = omega / 2pi in Hz. The
// Hamiltonian matrices returned by the builders are in angular units (rad/s);
// `angular` is the only conversion point.

#include "pdc/fock.hpp"

#include <numbers>
#include <string>
#include <vector>

namespace pdc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double angular(double hz) { return kTwoPi * hz; }
inline constexpr Complex angular(Complex hz) { return kTwoPi * hz; }

struct SystemParams {
  double nu_a = 0.0;     ///< second-harmonic mode a
  double nu_b = 0.0;     ///< fundamental mode b
  double delta = 0.0;    ///< nu_e - nu_a
  double delta_r = 0.0;  ///< nu_r - nu_b
  Complex g_d = 0.0;     ///< a |e><g|
  Complex g_gr = 0.0;    ///< b |r><g|
  Complex g_er = 0.0;    ///< b |e><r|
  double gamma_a = 0.0;
  double gamma_b = 0.0;
  double epsilon = 0.0;  ///< real drive amplitude on mode a
  double phi = -std::numbers::pi / 2.0;

  // Level energies are derived from the detunings; the ground level sits at 0.
  double nu_e() const { return delta + 2.0 * nu_b; }
  double nu_r() const { return delta_r + nu_b; }

  /// 5.5 GHz resonator with a flux qubit detuned by nu_a/10 (and nu_a/20 for
  /// the r level), couplings 20/10/10 MHz, decays 11/5.5 MHz.
  static SystemParams reference();
};

struct EffectiveParams {
  double chi = 0.0;
  double shift_a = 0.0;
  double shift_b = 0.0;
  double nu_eff = 0.0;
  double epsilon_c = 0.0;  ///< +inf when chi == 0
  double phi_eff = 0.0;
  double matching_residual = 0.0;
};

/// Closed-form effective PDC parameters. Throws invalid-argument on a zero
/// detuning.
EffectiveParams effective_params(const SystemParams& p);

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Large-detuning and frequency-matching checks; empty when all hold.
std::vector<Diagnostic> validate_regime(const SystemParams& p, double factor = 10.0);

Operator build_H0(const SystemParams& p, const HilbertSpec& s);
Operator build_HI(const SystemParams& p, const HilbertSpec& s);

/// Two-mode effective Hamiltonian with the second-order shifts and the
/// third-order a†b² coupling (phase phi_eff).
Operator build_H_eff(const SystemParams& p, const HilbertSpec& s);

/// Driven two-mode Hamiltonian in the frame rotating at nu_eff (a) and
/// nu_eff/2 (b), with the coupling phase taken from p.phi.
Operator build_H_rotating(const SystemParams& p, const HilbertSpec& s);

/// K = 2 a†a + b†b + 2|e><e| + |r><r|, conserved by H0 + HI.
Operator excitation_operator(const HilbertSpec& s);
Index excitation_number(Level q, Index n_a, Index n_b);

}  // namespace pdc
