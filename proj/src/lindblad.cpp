#include "pdc/steady.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pdc {

namespace {

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

// Column-stacking vectorization: vec(A X B) = (B^T ⊗ A) vec(X).
SparseMatrix liouvillian(const SparseMatrix& h, const std::vector<std::pair<SparseMatrix, double>>& losses) {
  const Index d = h.rows();
  const SparseMatrix id = sparse_identity(d);
  const Complex minus_i(0.0, -1.0);
  SparseMatrix l = minus_i * (kron(id, h) - kron(SparseMatrix(h.transpose()), id));
  for (const auto& [c, rate] : losses) {
    const SparseMatrix cdc = c.adjoint() * c;
    l += rate * (kron(SparseMatrix(c.conjugate()), c) - 0.5 * kron(id, cdc) -
                 0.5 * kron(SparseMatrix(cdc.transpose()), id));
  }
  l.makeCompressed();
  return l;
}

// The model is invariant under b -> -b, so the steady state has no elements
// between Fock states of opposite b parity. Returns the vec indices kept.
std::vector<Index> even_parity_indices(const HilbertSpec& s) {
  const Index d = s.mode_dim();
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(d * d / 2 + d));
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      if ((i % s.dim_b() - j % s.dim_b()) % 2 == 0) keep.push_back(i + j * d);
    }
  }
  return keep;
}

// L restricted to the kept indices, with the rho_00 equation replaced by
// Tr(rho) = 1.
SparseMatrix bordered(const SparseMatrix& l, Index d, const std::vector<Index>& keep) {
  std::vector<Index> pos(static_cast<std::size_t>(d * d), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[static_cast<std::size_t>(keep[k])] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(l.nonZeros() / 2 + d));
  for (Index k = 0; k < l.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(l, k); it; ++it) {
      const Index row = pos[static_cast<std::size_t>(it.row())];
      const Index col = pos[static_cast<std::size_t>(it.col())];
      if (row > 0 && col >= 0) trip.emplace_back(row, col, it.value());
    }
  }
  for (Index i = 0; i < d; ++i) trip.emplace_back(0, pos[static_cast<std::size_t>(i * (d + 1))], 1.0);
  const Index n = static_cast<Index>(keep.size());
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.makeCompressed();
  return out;
}

// BiCGSTAB with an incomplete-LU preconditioner, tightened once; sparse LU
// for small systems that still fail.
Vector solve_bordered(const SparseMatrix& system, const Vector& rhs) {
  auto good = [&](const Vector& x) { return x.allFinite() && (system * x - rhs).norm() <= 1e-11 * rhs.norm(); };
  const std::pair<double, int> ilut[] = {{1e-2, 3}, {1e-4, 10}};
  for (const auto& [droptol, fill] : ilut) {
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<Complex>> solver;
    solver.preconditioner().setDroptol(droptol);
    solver.preconditioner().setFillfactor(fill);
    solver.setTolerance(1e-13);
    solver.setMaxIterations(2000);
    solver.compute(system);
    if (solver.info() != Eigen::Success) continue;
    const Vector x = solver.solve(rhs);
    if (good(x)) return x;
  }
  if (system.rows() > 40000) {
    throw NumericalFailure("lindblad_steady_state: iterative solver did not converge");
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw NumericalFailure("lindblad_steady_state: factorization failed: " + lu.lastErrorMessage());
  }
  Vector x = lu.solve(rhs);
  for (int pass = 0; pass < 3 && x.allFinite() && !good(x); ++pass) x += lu.solve(Vector(rhs - system * x));
  if (!x.allFinite()) throw NumericalFailure("lindblad_steady_state: singular steady-state system");
  return x;
}

// Mode a is solved in the frame displaced by its mean field, a -> alpha + a.
// The transformation is exact; it only moves the coherent part out of the
// truncated Fock basis.
double mode_a_displacement(const PdcRates& r, double eps) {
  const double ec = r.epsilon_c();
  return eps <= ec ? eps / r.gamma_a : r.gamma_b / r.chi;
}

// Drive, PDC coupling and the extra term i gamma_a (alpha* a - alpha a†)
// produced by displacing the loss channel of a. Rates in Hz.
SparseMatrix displaced_hamiltonian(const PdcRates& r, double eps, double alpha, const SparseMatrix& a,
                                   const SparseMatrix& b) {
  const Complex i(0.0, 1.0);
  const SparseMatrix id = sparse_identity(a.rows());
  const SparseMatrix shifted = a + alpha * id;
  const SparseMatrix shifted_dag = shifted.adjoint();
  const SparseMatrix a_dag = a.adjoint();
  const SparseMatrix b2 = b * b;
  const SparseMatrix b2_dag = b2.adjoint();
  const Complex coupling = 0.5 * r.chi * std::polar(1.0, r.phi);
  SparseMatrix h = (i * eps) * (shifted_dag - shifted);
  h += coupling * SparseMatrix(shifted_dag * b2) + std::conj(coupling) * SparseMatrix(b2_dag * shifted);
  h += (i * r.gamma_a * alpha) * (a - a_dag);
  h.prune(Complex(0.0));
  return h;
}

}  // namespace

LindbladResult lindblad_steady_state(const SystemParams& p, const HilbertSpec& s) {
  s.validate();
  if (!(p.gamma_a > 0.0) || !(p.gamma_b > 0.0)) {
    throw std::invalid_argument("lindblad_steady_state: gamma_a and gamma_b must be positive");
  }
  if (s.mode_dim() > kMaxLindbladModeDim) {
    throw NumericalFailure("lindblad_steady_state: cutoffs (" + std::to_string(s.cutoff_a) + ", " +
                           std::to_string(s.cutoff_b) + ") give a two-mode dimension of " +
                           std::to_string(s.mode_dim()) + ", above the solver limit of " +
                           std::to_string(kMaxLindbladModeDim));
  }
  // The steady state is invariant under a common rescaling of all rates.
  const double scale = std::max(p.gamma_a, p.gamma_b);
  const PdcRates r = pdc_rates(p);
  const double alpha = mode_a_displacement(r, p.epsilon);
  const SparseMatrix a = embed_mode(annihilation(s.cutoff_a), Slot::mode_a, s).matrix();
  const SparseMatrix b = embed_mode(annihilation(s.cutoff_b), Slot::mode_b, s).matrix();
  const SparseMatrix h = displaced_hamiltonian(r, p.epsilon, alpha, a, b) / Complex(scale);
  const Index d = s.mode_dim();
  const SparseMatrix l = liouvillian(h, {{a, 2.0 * p.gamma_a / scale}, {b, 2.0 * p.gamma_b / scale}});
  const std::vector<Index> keep = even_parity_indices(s);
  const SparseMatrix system = bordered(l, d, keep);
  Vector rhs = Vector::Zero(system.rows());
  rhs(0) = 1.0;
  const Vector reduced = solve_bordered(system, rhs);
  Vector x = Vector::Zero(d * d);
  for (std::size_t k = 0; k < keep.size(); ++k) x(keep[k]) = reduced(static_cast<Index>(k));

  DenseMatrix rho_m = Eigen::Map<const DenseMatrix>(x.data(), d, d);
  LindbladResult out{DensityMatrix(s.mode_shape(), rho_m), alpha, {}, 0.0, 0.0, 0.0};
  out.residual = (l * x).norm() / x.norm();
  if (out.residual > 1e-8) {
    throw NumericalFailure("lindblad_steady_state: residual " + std::to_string(out.residual) + " above 1e-8");
  }

  for (Index na = 0; na <= s.cutoff_a; ++na) {
    for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
      const double pop = rho_m(s.mode_index(na, nb), s.mode_index(na, nb)).real();
      if (na >= s.cutoff_a - 1) out.top_population_a += pop;
      if (nb >= s.cutoff_b - 1) out.top_population_b += pop;
    }
  }
  if (out.top_population_a > kTruncationTolerance || out.top_population_b > kTruncationTolerance) {
    HilbertSpec need = s;
    if (out.top_population_a > kTruncationTolerance) need.cutoff_a += std::max<Index>(4, s.cutoff_a / 2);
    if (out.top_population_b > kTruncationTolerance) need.cutoff_b += std::max<Index>(4, s.cutoff_b / 2);
    throw TruncationTooSmall("lindblad_steady_state: truncation too small (top-level populations " +
                                 std::to_string(out.top_population_a) + ", " +
                                 std::to_string(out.top_population_b) + "); need cutoffs of at least (" +
                                 std::to_string(need.cutoff_a) + ", " + std::to_string(need.cutoff_b) + ")",
                             need);
  }

  const Operator bop = embed_mode(annihilation(s.cutoff_b), Slot::mode_b, s);
  const Operator bd = bop.adjoint();
  const DensityMatrix& rho = out.rho;
  const Complex mean_b = expectation(rho, bop);
  const double n_b = expectation(rho, bd * bop).real();
  const Complex bb = expectation(rho, bop * bop);
  const double fourth = expectation(rho, bd * bd * bop * bop).real();

  FluctuationReport& rep = out.report;
  rep.method = Method::lindblad;
  rep.mean_b = mean_b;
  rep.n_b = n_b;
  rep.anomalous = bb - mean_b * mean_b;
  const double fluct_n = n_b - std::norm(mean_b);
  rep.var_x = 1.0 + 2.0 * fluct_n + 2.0 * rep.anomalous.real();
  rep.var_y = 1.0 + 2.0 * fluct_n - 2.0 * rep.anomalous.real();
  rep.g2 = n_b > 0.0 ? fourth / (n_b * n_b) : std::numeric_limits<double>::quiet_NaN();
  const double ec = r.epsilon_c();
  rep.near_threshold = std::isfinite(ec) && std::abs(p.epsilon - ec) <= kThresholdWindow * ec;
  return out;
}

LindbladResult lindblad_steady_state(const PdcRates& r, double eps, const HilbertSpec& s) {
  SystemParams p = params_with_chi(r.chi, r.gamma_a, r.gamma_b);
  p.epsilon = eps;
  p.phi = r.phi;
  return lindblad_steady_state(p, s);
}

HilbertSpec suggest_lindblad_cutoffs(const PdcRates& r, double eps) {
  // a is displaced by its mean field, so only its fluctuations need room; b
  // carries the full above-threshold field (both signs of beta).
  const double ec = r.epsilon_c();
  const double n_b = eps > ec ? 2.0 * (eps - ec) / r.chi : 0.0;
  const auto cut = [](double n, double floor) {
    return static_cast<Index>(std::ceil(std::max(floor, n + 6.0 * std::sqrt(n) + 8.0)));
  };
  return {4, cut(n_b, 8.0)};
}

LindbladResult lindblad_steady_state_auto(const PdcRates& r, double eps, int max_attempts) {
  HilbertSpec s = suggest_lindblad_cutoffs(r, eps);
  for (int attempt = 1;; ++attempt) {
    try {
      return lindblad_steady_state(r, eps, s);
    } catch (const TruncationTooSmall& ex) {
      if (attempt >= max_attempts) throw;
      s = ex.required();
    }
  }
}

}  // namespace pdc
