#include "pdc/elimination.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace pdc;

namespace {

double generator_residual(const SystemParams& p, const HilbertSpec& s) {
  const Operator hi = build_HI(p, s);
  const Operator S = build_generator(p, s).op;
  return (commutator(build_H0(p, s), S) + hi).frobenius_norm() / hi.frobenius_norm();
}

SystemParams complex_couplings() {
  SystemParams p = SystemParams::reference();
  p.g_d = std::polar(20e6, 0.4);
  p.g_gr = std::polar(10e6, -1.3);
  p.g_er = std::polar(10e6, 2.2);
  return p;
}

}  // namespace

TEST_CASE("generator solves [H0, S] = -HI") {
  for (const HilbertSpec s : {HilbertSpec{2, 4}, HilbertSpec{3, 6}}) {
    CHECK(generator_residual(SystemParams::reference(), s) <= 1e-12);
    CHECK(generator_residual(complex_couplings(), s) <= 1e-12);
  }
  const GeneratorS gen = build_generator(SystemParams::reference(), HilbertSpec{2, 4});
  CHECK((gen.op + gen.op.adjoint()).max_abs() == 0.0);
  CHECK(gen.coeff_ge.real() == doctest::Approx(20.0 / 550.0));
  CHECK(gen.coeff_re.real() == doctest::Approx(10.0 / 275.0));
  CHECK(gen.coeff_gr.real() == doctest::Approx(10.0 / 275.0));
}

TEST_CASE("degenerate denominators are named") {
  auto message = [](SystemParams p) {
    try {
      build_generator(p, HilbertSpec{1, 2});
    } catch (const std::invalid_argument& ex) {
      return std::string(ex.what());
    }
    return std::string();
  };
  SystemParams p = SystemParams::reference();
  p.delta = 0.0;
  CHECK(message(p).find("delta = 0") != std::string::npos);
  p = SystemParams::reference();
  p.delta_r = 0.0;
  CHECK(message(p).find("delta_r = 0") != std::string::npos);
  p = SystemParams::reference();
  p.delta_r = p.delta;
  CHECK(message(p).find("(delta - delta_r)") != std::string::npos);
}

TEST_CASE("extracted coefficients match the closed form") {
  for (const SystemParams& p : {SystemParams::reference(), complex_couplings()}) {
    const EliminationReport rep = project_effective(p, HilbertSpec{2, 4}).report;
    const EffectiveParams e = effective_params(p);
    CHECK(rep.relative_deviation <= 1e-10);
    CHECK(std::abs(rep.extracted_chi_half) == doctest::Approx(0.5 * e.chi).epsilon(1e-10));
    CHECK(std::abs(rep.extracted_shift_a - e.shift_a) <= 1e-10 * e.shift_a);
    CHECK(std::abs(rep.extracted_shift_b - e.shift_b) <= 1e-10 * e.shift_b);
    CHECK(rep.dropped_terms.empty());
  }
}

TEST_CASE("extracted chi follows the couplings") {
  const SystemParams p = SystemParams::reference();
  const double base = std::abs(project_effective(p, HilbertSpec{1, 2}).report.extracted_chi_half);
  SystemParams q = p;
  q.g_d *= 2.0;
  CHECK(std::abs(project_effective(q, HilbertSpec{1, 2}).report.extracted_chi_half) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  q = p;
  q.g_er *= 0.5;
  CHECK(std::abs(project_effective(q, HilbertSpec{1, 2}).report.extracted_chi_half) ==
        doctest::Approx(0.5 * base).epsilon(1e-12));
}

TEST_CASE("extraction does not depend on the cutoffs") {
  const SystemParams p = complex_couplings();
  const EliminationReport small = project_effective(p, HilbertSpec{1, 2}).report;
  const EliminationReport large = project_effective(p, HilbertSpec{3, 6}).report;
  CHECK(std::abs(small.extracted_chi_half - large.extracted_chi_half) <= 1e-12 * std::abs(large.extracted_chi_half));
  CHECK(std::abs(small.extracted_shift_a - large.extracted_shift_a) <= 1e-12 * large.extracted_shift_a);
  CHECK(std::abs(small.extracted_shift_b - large.extracted_shift_b) <= 1e-12 * large.extracted_shift_b);
}

TEST_CASE("projected operator is Hermitian and reproduces the low spectrum") {
  const SystemParams p = SystemParams::reference();
  const HilbertSpec s{2, 4};
  CHECK(project_effective(p, s).h_eff.is_hermitian(1e-6));
  const auto pairs = spectral_check(p, s, 4);
  REQUIRE_FALSE(pairs.empty());
  const double shift_a = effective_params(p).shift_a;
  for (const SpectralPair& sp : pairs) {
    // Remaining gaps are fourth order, g^4 / delta^3 ~ 1 kHz here.
    CHECK(std::abs(sp.gap_hz) < 2e-3 * shift_a);
  }
}
