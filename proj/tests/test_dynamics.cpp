#include "pdc/dynamics.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace pdc;

namespace {

Operator random_hermitian(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return Operator({n}, DenseMatrix(0.5 * (m + m.adjoint())));
}

StateVector random_state(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(nd(rng), nd(rng));
  return StateVector({n}, v.normalized());
}

Vector exact_propagate(const Operator& h, const Vector& v, double t) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h.dense());
  const Vector phases = (-Complex(0.0, 1.0) * t * es.eigenvalues().cast<Complex>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * v;
}

}  // namespace

TEST_CASE("Lanczos step converges with the order of the Krylov space") {
  const Operator h = random_hermitian(40, 7);
  const Vector v = random_state(40, 8).amplitudes();
  for (Index m : {3, 4, 5}) {
    const double dt = 0.05;
    const double e1 = (lanczos_step(h.matrix(), v, dt, m).state - exact_propagate(h, v, dt)).norm();
    const double e2 = (lanczos_step(h.matrix(), v, dt / 2.0, m).state - exact_propagate(h, v, dt / 2.0)).norm();
    // Local error is O(dt^m).
    CHECK(std::log2(e1 / e2) == doctest::Approx(static_cast<double>(m)).epsilon(0.15));
    // The a posteriori estimate bounds the true error and shrinks like dt^(m-1).
    const double est1 = lanczos_step(h.matrix(), v, dt, m).error_estimate;
    const double est2 = lanczos_step(h.matrix(), v, dt / 2.0, m).error_estimate;
    CHECK(est1 >= e1);
    CHECK(est2 >= e2);
    CHECK(std::log2(est1 / est2) >= static_cast<double>(m) - 1.2);
  }
  // A full-size basis is exact.
  CHECK((lanczos_step(h.matrix(), v, 1.0, 40).state - exact_propagate(h, v, 1.0)).norm() < 1e-10);
}

TEST_CASE("adaptive Krylov evolution matches dense propagation") {
  const Operator h = random_hermitian(60, 11);
  const StateVector psi0 = random_state(60, 12);
  const TimeGrid grid{0.0, 3.0, 7};
  const auto kry = evolve(h, psi0, grid);
  const auto ex = evolve_exact(h, psi0, grid);
  REQUIRE(kry.size() == 7);
  for (std::size_t k = 0; k < kry.size(); ++k) {
    CHECK((kry[k].amplitudes() - ex[k].amplitudes()).norm() < 1e-8);
    CHECK(std::abs(kry[k].norm() - 1.0) < 1e-9);
    CHECK((ex[k].amplitudes() - exact_propagate(h, psi0.amplitudes(), grid.time(static_cast<Index>(k)))).norm() <
          1e-10);
  }
}

TEST_CASE("evolve rejects bad input") {
  const StateVector psi0 = random_state(4, 1);
  DenseMatrix m = DenseMatrix::Zero(4, 4);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(evolve(Operator({4}, m), psi0, TimeGrid{0.0, 1.0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(evolve(random_hermitian(4, 2), StateVector({4}, 2.0 * psi0.amplitudes()), TimeGrid{0.0, 1.0, 2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(evolve(random_hermitian(5, 2), psi0, TimeGrid{0.0, 1.0, 2}), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{1.0, 1.0, 5}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((TimeGrid{0.0, 1.0, 1}).validate(), std::invalid_argument);
}

TEST_CASE("an unreachable tolerance raises IntegrationFailure") {
  const Operator h = random_hermitian(30, 3);
  EvolveOptions opts;
  opts.tol = 1e-300;
  opts.krylov_dim = 2;
  opts.max_halvings = 3;
  CHECK_THROWS_AS(evolve(h, random_state(30, 4), TimeGrid{0.0, 1.0, 2}, opts), IntegrationFailure);
}

TEST_CASE("effective model shows full Rabi transfer |1,0> -> |0,2>") {
  const SystemParams p = SystemParams::reference();
  const HilbertSpec s{1, 2};
  const TimeGrid grid = default_rabi_grid(p);
  const FullVsEffective run = run_full_vs_effective(p, s, grid);
  const double w = angular(effective_params(p).chi) / std::sqrt(2.0);
  const auto& nb = run.eff.channel("n_b");
  for (Index k = 0; k < grid.n_samples; k += 50) {
    const double expected = 2.0 * std::pow(std::sin(w * grid.time(k)), 2);
    CHECK(nb[static_cast<std::size_t>(k)] == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
  CHECK(run.summary.transfer_time_eff == doctest::Approx(transfer_time(p)).epsilon(1e-5));
}

TEST_CASE("sector propagation is cutoff independent and conserves K") {
  const SystemParams p = SystemParams::reference();
  const TimeGrid grid{0.0, 2.0 * transfer_time(p), 201};
  const FullVsEffective small = run_full_vs_effective(p, HilbertSpec{1, 2}, grid);
  for (const HilbertSpec s : {HilbertSpec{2, 4}, HilbertSpec{3, 6}}) {
    const FullVsEffective big = run_full_vs_effective(p, s, grid);
    const auto& a = small.full.channel("P_g");
    const auto& b = big.full.channel("P_g");
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-9);
  }
  CHECK(small.summary.excitation_drift <= 1e-8);
  CHECK(small.summary.norm_drift <= 1e-9);
  CHECK(excitation_sector(HilbertSpec{1, 2}, 2).size() == 4);
}

TEST_CASE("Krylov and sector propagation agree") {
  const SystemParams p = SystemParams::reference();
  const TimeGrid grid{0.0, transfer_time(p), 41};
  const HilbertSpec s{2, 4};
  const FullVsEffective sec = run_full_vs_effective(p, s, grid, DynamicsMethod::sector);
  const FullVsEffective kry = run_full_vs_effective(p, s, grid, DynamicsMethod::krylov);
  for (const char* ch : {"P_g", "n_a", "n_b"}) {
    const auto& a = sec.full.channel(ch);
    const auto& b = kry.full.channel(ch);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-8);
  }
  CHECK(kry.summary.excitation_drift <= 1e-8);
}

TEST_CASE("sector propagation refuses states outside the sector") {
  const SystemParams p = SystemParams::reference();
  const HilbertSpec s{1, 2};
  const Operator h = build_H0(p, s) + build_HI(p, s);
  CHECK_THROWS_AS(evolve_in_sector(h, basis_state(Level::g, 0, 1, s), s, 2, TimeGrid{0.0, 1e-6, 3}),
                  std::invalid_argument);
}

TEST_CASE("first maximum is refined between samples") {
  const TimeGrid grid{0.0, 3.0, 31};
  std::vector<double> v;
  for (Index k = 0; k < grid.n_samples; ++k) v.push_back(std::sin(grid.time(k)));
  CHECK(first_maximum_time(grid, v) == doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-3));
  TimeSeries ts;
  ts.grid = grid;
  CHECK_THROWS_AS(conserved_excitation(ts), std::invalid_argument);
}
