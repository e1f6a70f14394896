#include "pdc/steady.hpp"

#include <doctest.h>

#include <cmath>

using namespace pdc;

namespace {

// gamma_a = 2 gamma_b, chi = 0.2 gamma_b, in MHz-sized units.
const PdcRates kRates{0.2e6, 2e6, 1e6};

}  // namespace

TEST_CASE("mean field branches") {
  const PdcRates r = kRates;
  const double ec = r.epsilon_c();
  CHECK(ec == doctest::Approx(10e6));
  for (double x : {0.0, 0.3, 0.99}) {
    const MeanField mf = mean_field(r, x * ec);
    CHECK(mf.branch == Branch::below);
    CHECK(mf.alpha.real() == doctest::Approx(x * ec / r.gamma_a));
    CHECK(mf.beta == Complex(0.0));
  }
  for (double x : {1.01, 1.5, 4.0}) {
    const MeanField mf = mean_field(r, x * ec);
    CHECK(mf.branch == Branch::above_positive);
    CHECK(mf.alpha.real() == doctest::Approx(r.gamma_b / r.chi));
    CHECK(std::norm(mf.beta) == doctest::Approx(2.0 * (x - 1.0) * ec / r.chi).epsilon(1e-13));
  }
  // Both alpha branches meet at threshold.
  CHECK(std::abs(ec / r.gamma_a - r.gamma_b / r.chi) <= 1e-12 * r.gamma_b / r.chi);

  PdcRates other = r;
  other.phi = 0.0;
  CHECK_THROWS_AS(mean_field(other, 1.0), std::invalid_argument);
  other = r;
  other.gamma_b = 0.0;
  CHECK_THROWS_AS(mean_field(other, 1.0), std::invalid_argument);
}

TEST_CASE("linearized variances below threshold") {
  const PdcRates r = kRates;
  const double ec = r.epsilon_c();
  Variances v = linearized_variances(r, 0.0);
  CHECK(v.var_x == doctest::Approx(1.0));
  CHECK(v.var_y == doctest::Approx(1.0));
  v = linearized_variances(r, 0.5 * ec);
  CHECK(v.var_x == doctest::Approx(2.0));
  CHECK(v.var_y == doctest::Approx(2.0 / 3.0));
  v = linearized_variances(r, ec);
  CHECK(v.var_y == doctest::Approx(0.5));
  CHECK(v.near_threshold);
  for (int k = 0; k < 50; ++k) {
    const double x = 0.98 * k / 49.0;
    const Variances w = linearized_variances(r, x * ec);
    CHECK(std::abs(w.var_x * w.var_y * (1.0 - x * x) - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(linearized_variances(r, -1.0), std::invalid_argument);
}

TEST_CASE("Lyapunov covariance reproduces the closed form below threshold") {
  const PdcRates r = kRates;
  for (double x : {0.1, 0.5, 0.9}) {
    const Eigen::Matrix4d c = linearized_covariance(r, x * r.epsilon_c());
    const Variances v = linearized_variances(r, x * r.epsilon_c());
    CHECK(c(2, 2) == doctest::Approx(v.var_x).epsilon(1e-12));
    CHECK(c(3, 3) == doctest::Approx(v.var_y).epsilon(1e-12));
    // Below threshold the pump stays coherent.
    CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("linearized g2 below and above threshold") {
  const PdcRates r = kRates;
  const double ec = r.epsilon_c();
  CHECK(linearized_g2(r, 0.1 * ec).g2 == doctest::Approx(102.0).epsilon(1e-10));
  for (double x : {0.2, 0.5, 0.8}) CHECK(linearized_g2(r, x * ec).g2 == doctest::Approx(2.0 + 1.0 / (x * x)));
  double last = linearized_g2(r, 0.05 * ec).g2;
  for (int k = 2; k <= 100; ++k) {
    const double x = 0.05 * k;
    if (std::abs(x - 1.0) <= kThresholdWindow) continue;
    const double g = linearized_g2(r, x * ec).g2;
    CHECK(g < last);
    last = g;
  }
  CHECK(std::abs(linearized_g2(r, 5.0 * ec).g2 - 1.0) <= 0.1);
  CHECK(std::isnan(linearized_g2(r, 0.0).g2));
}

TEST_CASE("Lindblad steady state against the linearized theory") {
  const PdcRates r = kRates;
  for (double x : {0.2, 0.3, 0.5}) {
    const double eps = x * r.epsilon_c();
    const LindbladResult res = lindblad_steady_state_auto(r, eps);
    CHECK(std::abs(res.rho.trace() - Complex(1.0)) <= 1e-9);
    CHECK(res.rho.min_eigenvalue() >= -1e-8);
    CHECK(res.rho.hermiticity_error() <= 1e-10);
    CHECK(res.residual <= 1e-8);
    CHECK(res.top_population_a <= kTruncationTolerance);
    CHECK(res.top_population_b <= kTruncationTolerance);

    const Variances lin = linearized_variances(r, eps);
    CHECK(std::abs(res.report.var_y / lin.var_y - 1.0) <= 0.05);
    CHECK(std::abs(res.report.g2 / linearized_g2(r, eps).g2 - 1.0) <= 0.10);

    // Gaussian moment factorization for the zero-mean signal field.
    const FluctuationReport& f = res.report;
    const double wick = 2.0 * f.n_b * f.n_b + std::norm(f.anomalous);
    CHECK(std::abs(f.g2 * f.n_b * f.n_b / wick - 1.0) <= 0.10);
  }
}

TEST_CASE("Lindblad results do not depend on the cutoffs once converged") {
  const PdcRates r = kRates;
  const double eps = 0.4 * r.epsilon_c();
  const LindbladResult a = lindblad_steady_state(r, eps, HilbertSpec{5, 10});
  const LindbladResult b = lindblad_steady_state(r, eps, HilbertSpec{7, 14});
  CHECK(a.report.var_y == doctest::Approx(b.report.var_y).epsilon(1e-4));
  CHECK(a.report.n_b == doctest::Approx(b.report.n_b).epsilon(1e-4));
}

TEST_CASE("Lindblad truncation and size guards") {
  const PdcRates r = kRates;
  const double eps = 0.5 * r.epsilon_c();
  try {
    lindblad_steady_state(r, eps, HilbertSpec{1, 2});
    FAIL("expected TruncationTooSmall");
  } catch (const TruncationTooSmall& ex) {
    CHECK(ex.required().cutoff_b > 2);
  }
  CHECK_THROWS_AS(lindblad_steady_state(r, eps, HilbertSpec{40, 40}), NumericalFailure);
  PdcRates lossless = r;
  lossless.gamma_a = 0.0;
  CHECK_THROWS_AS(lindblad_steady_state(lossless, eps, HilbertSpec{4, 8}), std::invalid_argument);
}

TEST_CASE("SDE ensemble statistics") {
  const PdcRates r = kRates;
  SdeOptions opts;
  opts.n_traj = 1000;
  opts.t_max = 12.0 / angular(r.gamma_b);
  opts.threads = 1;
  const double eps = 0.5 * r.epsilon_c();
  const SdeResult small = sde_trajectories(r, eps, opts);
  opts.n_traj = 2000;
  const SdeResult large = sde_trajectories(r, eps, opts);
  CHECK(small.stats.var_y_se / large.stats.var_y_se == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  CHECK(std::abs(large.report.var_y - 2.0 / 3.0) <= 4.0 * large.stats.var_y_se);

  // Identical ensembles regardless of the worker count.
  opts.threads = 3;
  const SdeResult threaded = sde_trajectories(r, eps, opts);
  CHECK(threaded.report.var_y == large.report.var_y);
  CHECK(threaded.report.g2 == large.report.g2);

  opts.n_traj = 50;
  CHECK_THROWS_AS(sde_trajectories(r, eps, opts), std::invalid_argument);
  opts.n_traj = 1000;
  opts.dt = 1.0 / angular(r.gamma_a);
  CHECK_THROWS_AS(sde_trajectories(r, eps, opts), std::invalid_argument);
}

TEST_CASE("threshold scan") {
  const PdcRates r = kRates;
  const double ec = r.epsilon_c();
  ScanOptions opts;
  opts.threads = 2;
  opts.lindblad_spec = HilbertSpec{5, 14};
  const auto rows = threshold_scan(r, {0.0, 0.5 * ec, 2.0 * ec}, {Method::linearized, Method::lindblad}, opts);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].method == Method::linearized);
  CHECK(rows[1].method == Method::lindblad);
  CHECK(rows[2].eps == doctest::Approx(0.5 * ec));
  CHECK(rows[0].flags.find("g2_undefined") != std::string::npos);
  CHECK(rows[3].report.var_y == doctest::Approx(2.0 / 3.0).epsilon(0.05));
  // Fixed cutoffs far too small for the populated signal above threshold.
  CHECK(rows[5].flags.find("error:") != std::string::npos);
  CHECK(std::isnan(rows[5].report.var_y));
  CHECK(threshold_scan(r, {ec}, {Method::linearized})[0].flags.find("near_threshold") != std::string::npos);
  CHECK_THROWS_AS(threshold_scan(r, {ec, 0.0}, {Method::linearized}), std::invalid_argument);
  CHECK_THROWS_AS(threshold_scan(r, {-1.0}, {Method::linearized}), std::invalid_argument);
}
