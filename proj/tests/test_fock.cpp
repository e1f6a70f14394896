#include "pdc/fock.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace pdc;

namespace {

Eigen::VectorXd sorted_eigenvalues(const Operator& op) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(op.dense());
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("ladder operators on a 4-level mode") {
  const Operator a = annihilation(3);
  const Operator ad = creation(3);
  CHECK(a.dim() == 4);
  CHECK(std::abs(a.element(0, 1) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(a.element(2, 3) - Complex(std::sqrt(3.0))) < 1e-15);
  CHECK((ad - a.adjoint()).max_abs() == 0.0);

  const Operator n = number(3);
  for (Index k = 0; k < 4; ++k) CHECK(n.element(k, k).real() == doctest::Approx(static_cast<double>(k)));
  CHECK((ad * a - n).max_abs() < 1e-15);
}

TEST_CASE("truncated commutator is the identity except at the top level") {
  for (Index cutoff : {1, 2, 5, 9}) {
    const Operator c = commutator(annihilation(cutoff), creation(cutoff));
    DenseMatrix expected = DenseMatrix::Identity(cutoff + 1, cutoff + 1);
    expected(cutoff, cutoff) = -static_cast<double>(cutoff);
    CHECK((c.dense() - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("annihilation rejects an empty mode") {
  CHECK_THROWS_AS(annihilation(0), std::invalid_argument);
  CHECK_THROWS_AS(annihilation(-2), std::invalid_argument);
}

TEST_CASE("qubit transitions") {
  const Operator eg = qubit_transition(Level::e, Level::g);
  CHECK(eg.dim() == 3);
  CHECK(eg.element(2, 0) == Complex(1.0));
  CHECK((qubit_transition("g", "e") - eg.adjoint()).max_abs() == 0.0);
  CHECK((qubit_transition("r", "r") * qubit_transition("r", "r") - qubit_transition("r", "r")).max_abs() == 0.0);
  CHECK_THROWS_AS(parse_level("x"), std::invalid_argument);
  CHECK(level_label(parse_level("r")) == 'r');
}

TEST_CASE("basis ordering is qubit, then a, then b") {
  const HilbertSpec s{2, 3};
  CHECK(s.dim() == 3 * 3 * 4);
  CHECK(s.index(Level::g, 0, 0) == 0);
  CHECK(s.index(Level::g, 0, 1) == 1);
  CHECK(s.index(Level::g, 1, 0) == 4);
  CHECK(s.index(Level::r, 0, 0) == 12);
  CHECK(s.index(Level::e, 2, 3) == s.dim() - 1);
  CHECK(s.mode_index(1, 2) == 6);

  const StateVector psi = basis_state(Level::r, 1, 2, s);
  const Operator na = embed(number(s.cutoff_a), Slot::mode_a, s);
  const Operator nb = embed(number(s.cutoff_b), Slot::mode_b, s);
  const Operator pr = embed(qubit_transition(Level::r, Level::r), Slot::qubit, s);
  CHECK(expectation(psi, na).real() == doctest::Approx(1.0));
  CHECK(expectation(psi, nb).real() == doctest::Approx(2.0));
  CHECK(expectation(psi, pr).real() == doctest::Approx(1.0));
}

TEST_CASE("cutoff validation") {
  const HilbertSpec smallest{1, 2}, no_a{0, 2}, short_b{1, 1};
  CHECK_NOTHROW(smallest.validate());
  CHECK_THROWS_AS(no_a.validate(), std::invalid_argument);
  CHECK_THROWS_AS(short_b.validate(), std::invalid_argument);
}

TEST_CASE("embedding preserves the spectrum with multiplicity") {
  const HilbertSpec s{2, 3};
  const Operator x = annihilation(s.cutoff_b) + creation(s.cutoff_b);
  const Eigen::VectorXd local = sorted_eigenvalues(x);
  const Eigen::VectorXd full = sorted_eigenvalues(embed(x, Slot::mode_b, s));
  const Index mult = s.dim() / s.dim_b();
  REQUIRE(full.size() == local.size() * mult);
  for (Index k = 0; k < local.size(); ++k) {
    for (Index m = 0; m < mult; ++m) CHECK(full(k * mult + m) == doctest::Approx(local(k)).epsilon(1e-12));
  }

  const Eigen::VectorXd two_mode = sorted_eigenvalues(embed_mode(number(s.cutoff_a), Slot::mode_a, s));
  CHECK(two_mode.size() == s.mode_dim());
  CHECK(two_mode.minCoeff() == doctest::Approx(0.0));
  CHECK(two_mode.maxCoeff() == doctest::Approx(2.0));
}

TEST_CASE("operator arithmetic and shape checks") {
  const HilbertSpec s{1, 2};
  const Operator a = embed(annihilation(1), Slot::mode_a, s);
  const Operator b = embed(annihilation(2), Slot::mode_b, s);
  CHECK(commutator(a, b).max_abs() == 0.0);
  CHECK(commutator(a, b.adjoint()).max_abs() == 0.0);
  CHECK((a + a.adjoint()).is_hermitian());
  CHECK_FALSE(a.is_hermitian());
  CHECK((Complex(0.0, 1.0) * (a.adjoint() - a)).is_hermitian());
  CHECK((a - a).max_abs() == 0.0);
  CHECK(Operator::identity(s.shape()).frobenius_norm() == doctest::Approx(std::sqrt(static_cast<double>(s.dim()))));

  CHECK_THROWS_AS(Operator({2, 2}, DenseMatrix::Zero(3, 3)), std::invalid_argument);
  const Operator other = embed_mode(annihilation(1), Slot::mode_a, s);
  CHECK_THROWS_AS(a + other, std::invalid_argument);
  CHECK_THROWS_AS(expectation(mode_basis_state(0, 0, s), a), std::invalid_argument);
}

TEST_CASE("density matrix diagnostics") {
  DenseMatrix m(2, 2);
  m << 0.75, Complex(0.0, 0.25), Complex(0.0, -0.25), 0.25;
  const DensityMatrix rho({2}, m);
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  CHECK(rho.hermiticity_error() < 1e-16);
  CHECK(rho.min_eigenvalue() == doctest::Approx(0.5 - std::sqrt(0.125)));
}
