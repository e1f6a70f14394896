#include "pdc/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdc {

SystemParams SystemParams::reference() {
  SystemParams p;
  p.nu_a = 5.5e9;
  p.nu_b = 2.75e9;
  p.delta = p.nu_a / 10.0;
  p.delta_r = p.delta / 2.0;
  p.g_d = 20e6;
  p.g_gr = 10e6;
  p.g_er = 10e6;
  p.gamma_a = 11e6;
  p.gamma_b = 5.5e6;
  return p;
}

EffectiveParams effective_params(const SystemParams& p) {
  if (p.delta == 0.0) throw std::invalid_argument("effective_params: delta must be nonzero");
  if (p.delta_r == 0.0) throw std::invalid_argument("effective_params: delta_r must be nonzero");

  EffectiveParams e;
  const double denom = p.delta * p.delta_r;
  e.chi = 2.0 * std::abs(p.g_d * p.g_er * p.g_gr) / std::abs(denom);
  e.shift_a = std::norm(p.g_d) / p.delta;
  e.shift_b = std::norm(p.g_gr) / p.delta_r;
  e.nu_eff = p.nu_a - e.shift_a;
  e.matching_residual = (p.nu_a - e.shift_a) - 2.0 * (p.nu_b - e.shift_b);

  const Complex path = std::conj(p.g_d) * p.g_er * p.g_gr;
  e.phi_eff = std::arg(path);
  if (denom < 0.0) e.phi_eff = std::remainder(e.phi_eff + std::numbers::pi, kTwoPi);

  const double threshold_num = p.gamma_a * p.gamma_b;
  e.epsilon_c = e.chi > 0.0 ? threshold_num / e.chi : std::numeric_limits<double>::infinity();
  return e;
}

std::vector<Diagnostic> validate_regime(const SystemParams& p, double factor) {
  std::vector<Diagnostic> out;
  const double gmax = std::max({std::abs(p.g_d), std::abs(p.g_gr), std::abs(p.g_er)});
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };

  if (std::abs(p.delta) < factor * gmax) {
    out.push_back({"delta-small", "|delta| = " + fmt(std::abs(p.delta)) + " Hz < " + fmt(factor) +
                                      " x max coupling " + fmt(gmax) + " Hz"});
  }
  if (std::abs(p.delta_r) < factor * gmax) {
    out.push_back({"delta_r-small", "|delta_r| = " + fmt(std::abs(p.delta_r)) + " Hz < " + fmt(factor) +
                                        " x max coupling " + fmt(gmax) + " Hz"});
  }
  if (std::abs(p.delta - p.delta_r) < factor * std::abs(p.g_er)) {
    out.push_back({"delta-minus-delta_r-small", "|delta - delta_r| = " + fmt(std::abs(p.delta - p.delta_r)) +
                                                    " Hz < " + fmt(factor) + " x |g_er| = " +
                                                    fmt(std::abs(p.g_er)) + " Hz"});
  }
  if (p.delta != 0.0 && p.delta_r != 0.0) {
    const EffectiveParams e = effective_params(p);
    if (std::abs(e.matching_residual) > e.chi / 10.0) {
      out.push_back({"matching", "frequency matching residual " + fmt(e.matching_residual) +
                                     " Hz exceeds chi/10 = " + fmt(e.chi / 10.0) + " Hz"});
    }
  }
  return out;
}

Operator build_H0(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  const Operator ee = embed(qubit_transition(Level::e, Level::e), Slot::qubit, s);
  const Operator rr = embed(qubit_transition(Level::r, Level::r), Slot::qubit, s);
  const Operator na = embed(number(s.cutoff_a), Slot::mode_a, s);
  const Operator nb = embed(number(s.cutoff_b), Slot::mode_b, s);
  return Complex(angular(p.nu_e())) * ee + Complex(angular(p.nu_r())) * rr + Complex(angular(p.nu_a)) * na +
         Complex(angular(p.nu_b)) * nb;
}

Operator build_HI(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  const Operator a = embed(annihilation(s.cutoff_a), Slot::mode_a, s);
  const Operator b = embed(annihilation(s.cutoff_b), Slot::mode_b, s);
  const Operator eg = embed(qubit_transition(Level::e, Level::g), Slot::qubit, s);
  const Operator rg = embed(qubit_transition(Level::r, Level::g), Slot::qubit, s);
  const Operator er = embed(qubit_transition(Level::e, Level::r), Slot::qubit, s);

  const Operator forward = angular(p.g_d) * (a * eg) + angular(p.g_gr) * (b * rg) + angular(p.g_er) * (b * er);
  return forward + forward.adjoint();
}

namespace {

Operator pdc_coupling(Complex half_chi_phase, const HilbertSpec& s) {
  const Operator a = embed_mode(annihilation(s.cutoff_a), Slot::mode_a, s);
  const Operator b = embed_mode(annihilation(s.cutoff_b), Slot::mode_b, s);
  const Operator up = half_chi_phase * (a.adjoint() * b * b);
  return up + up.adjoint();
}

}  // namespace

Operator build_H_eff(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  const EffectiveParams e = effective_params(p);
  const Operator na = embed_mode(number(s.cutoff_a), Slot::mode_a, s);
  const Operator nb = embed_mode(number(s.cutoff_b), Slot::mode_b, s);
  const Complex coupling = angular(0.5 * e.chi) * std::polar(1.0, e.phi_eff);
  return Complex(angular(p.nu_a - e.shift_a)) * na + Complex(angular(p.nu_b - e.shift_b)) * nb +
         pdc_coupling(coupling, s);
}

Operator build_H_rotating(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  const EffectiveParams e = effective_params(p);
  const Operator a = embed_mode(annihilation(s.cutoff_a), Slot::mode_a, s);
  const Complex i(0.0, 1.0);
  const Operator drive = (i * angular(p.epsilon)) * (a.adjoint() - a);
  const Complex coupling = angular(0.5 * e.chi) * std::polar(1.0, p.phi);
  return drive + pdc_coupling(coupling, s);
}

Index excitation_number(Level q, Index n_a, Index n_b) {
  const Index qubit = q == Level::e ? 2 : (q == Level::r ? 1 : 0);
  return 2 * n_a + n_b + qubit;
}

Operator excitation_operator(const HilbertSpec& s) {
  s.validate();
  Eigen::VectorXcd diag(s.dim());
  for (Level q : {Level::g, Level::r, Level::e}) {
    for (Index na = 0; na <= s.cutoff_a; ++na) {
      for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
        diag(s.index(q, na, nb)) = static_cast<double>(excitation_number(q, na, nb));
      }
    }
  }
  SparseMatrix m(s.dim(), s.dim());
  m.reserve(Eigen::VectorXi::Constant(s.dim(), 1));
  for (Index k = 0; k < s.dim(); ++k) m.insert(k, k) = diag(k);
  return Operator(s.shape(), std::move(m));
}

}  // namespace pdc
