#include "pdc/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace pdc {

void TimeGrid::validate() const {
  if (!(t_end > t_start)) throw std::invalid_argument("time grid needs t_end > t_start");
  if (n_samples < 2) throw std::invalid_argument("time grid needs at least 2 samples");
}

const std::vector<double>& TimeSeries::channel(const std::string& name) const {
  const auto it = channels.find(name);
  if (it == channels.end()) throw std::invalid_argument("time series has no channel '" + name + "'");
  return it->second;
}

KrylovStep lanczos_step(const SparseMatrix& h, const Vector& v, double dt, Index m) {
  const Index n = v.size();
  const double beta0 = v.norm();
  if (beta0 == 0.0) return {v, 0.0};
  m = std::min(m, n);

  DenseMatrix basis(n, m);
  Eigen::VectorXd diag(m);
  Eigen::VectorXd sub(m);  // sub(j) couples basis j and j+1
  basis.col(0) = v / beta0;
  Index used = m;
  double last_beta = 0.0;
  for (Index j = 0; j < m; ++j) {
    Vector w = h * basis.col(j);
    diag(j) = basis.col(j).dot(w).real();
    w -= diag(j) * basis.col(j);
    if (j > 0) w -= sub(j - 1) * basis.col(j - 1);
    // Full reorthogonalization; m is small.
    for (Index i = 0; i <= j; ++i) w -= basis.col(i).dot(w) * basis.col(i);
    const double b = w.norm();
    if (j + 1 == m) {
      last_beta = b;
      break;
    }
    if (b <= 1e-14 * std::max(1.0, std::abs(diag(j)))) {
      used = j + 1;  // invariant subspace: the step is exact
      last_beta = 0.0;
      break;
    }
    sub(j) = b;
    basis.col(j + 1) = w / b;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  if (used == 1) {
    Eigen::MatrixXd t(1, 1);
    t(0, 0) = diag(0);
    eig.compute(t);
  } else {
    eig.computeFromTridiagonal(diag.head(used), sub.head(used - 1));
  }
  const Eigen::MatrixXd& q = eig.eigenvectors();
  Vector phases(used);
  for (Index k = 0; k < used; ++k) phases(k) = std::polar(1.0, -eig.eigenvalues()(k) * dt);
  const Vector coeffs = q.cast<Complex>() * phases.cwiseProduct(q.row(0).transpose().cast<Complex>());

  KrylovStep out;
  out.state = beta0 * (basis.leftCols(used) * coeffs);
  // Weight the next Krylov vector would receive: the standard a posteriori estimate.
  out.error_estimate = beta0 * last_beta * std::abs(coeffs(used - 1));
  return out;
}

namespace {

void require_evolvable(const Operator& H, const StateVector& psi0) {
  if (H.shape() != psi0.shape()) throw std::invalid_argument("evolve: Hamiltonian and state dimensions differ");
  if (!H.is_hermitian(1e-12 * std::max(1.0, H.max_abs()))) {
    throw std::invalid_argument("evolve: Hamiltonian is not Hermitian");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-9) throw std::invalid_argument("evolve: initial state is not normalized");
}

}  // namespace

std::vector<StateVector> evolve(const Operator& H, const StateVector& psi0, const TimeGrid& grid,
                                const EvolveOptions& opts) {
  grid.validate();
  require_evolvable(H, psi0);

  // The energy <H> is conserved; shifting by it keeps the Krylov spectrum narrow.
  const double shift = expectation(psi0, H).real();
  SparseMatrix id(H.dim(), H.dim());
  id.setIdentity();
  const SparseMatrix hs = H.matrix() - Complex(shift) * id;

  double scale = 0.0;
  for (Index k = 0; k < hs.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(hs, k); it; ++it) col += std::abs(it.value());
    scale = std::max(scale, col);
  }

  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(grid.n_samples));
  Vector psi = psi0.amplitudes();
  out.emplace_back(psi0.shape(), psi);

  double t = grid.t_start;
  double h = scale > 0.0 ? 10.0 / scale : grid.step();
  for (Index k = 1; k < grid.n_samples; ++k) {
    const double target = grid.time(k);
    const double interval = target - t;
    const double min_step = interval * std::ldexp(1.0, -opts.max_halvings);
    while (t < target) {
      double trial = std::min(h, target - t);
      for (;;) {
        KrylovStep step = lanczos_step(hs, psi, trial, opts.krylov_dim);
        if (step.error_estimate <= opts.tol) {
          psi = std::move(step.state);
          t = (trial == target - t) ? target : t + trial;
          const double ratio = step.error_estimate > 0.0 ? opts.tol / step.error_estimate : 1e6;
          h = trial * std::clamp(0.9 * std::pow(ratio, 1.0 / static_cast<double>(opts.krylov_dim)), 0.2, 2.0);
          break;
        }
        trial *= 0.5;
        if (trial < min_step) {
          throw IntegrationFailure("evolve: tolerance " + std::to_string(opts.tol) +
                                   " not reached after maximal step subdivision");
        }
      }
    }
    const Complex phase = std::polar(1.0, -shift * (target - grid.t_start));
    out.emplace_back(psi0.shape(), phase * psi);
  }
  return out;
}

std::vector<StateVector> evolve_exact(const Operator& H, const StateVector& psi0, const TimeGrid& grid) {
  grid.validate();
  require_evolvable(H, psi0);
  const double shift = expectation(psi0, H).real();
  DenseMatrix hd = H.dense();
  hd.diagonal().array() -= shift;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(hd);
  const DenseMatrix& v = eig.eigenvectors();
  const Vector c = v.adjoint() * psi0.amplitudes();

  std::vector<StateVector> out;
  out.reserve(static_cast<std::size_t>(grid.n_samples));
  for (Index k = 0; k < grid.n_samples; ++k) {
    const double dt = grid.time(k) - grid.t_start;
    Vector rotated(c.size());
    for (Index j = 0; j < c.size(); ++j) rotated(j) = std::polar(1.0, -eig.eigenvalues()(j) * dt) * c(j);
    out.emplace_back(psi0.shape(), std::polar(1.0, -shift * dt) * (v * rotated));
  }
  return out;
}

std::vector<Index> excitation_sector(const HilbertSpec& s, Index K) {
  std::vector<Index> idx;
  for (Level q : {Level::g, Level::r, Level::e}) {
    for (Index na = 0; na <= s.cutoff_a; ++na) {
      for (Index nb = 0; nb <= s.cutoff_b; ++nb) {
        if (excitation_number(q, na, nb) == K) idx.push_back(s.index(q, na, nb));
      }
    }
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<StateVector> evolve_in_sector(const Operator& H, const StateVector& psi0, const HilbertSpec& s,
                                          Index K, const TimeGrid& grid) {
  if (H.shape() != s.shape() || psi0.shape() != s.shape()) {
    throw std::invalid_argument("evolve_in_sector: operands are not on the full space");
  }
  const std::vector<Index> idx = excitation_sector(s, K);
  const Index n = static_cast<Index>(idx.size());
  Vector sub(n);
  double inside = 0.0;
  for (Index i = 0; i < n; ++i) {
    sub(i) = psi0.amplitudes()(idx[i]);
    inside += std::norm(sub(i));
  }
  if (std::abs(psi0.norm() * psi0.norm() - inside) > 1e-14) {
    throw std::invalid_argument("evolve_in_sector: initial state has weight outside sector K=" + std::to_string(K));
  }
  const DenseMatrix full = H.dense();
  DenseMatrix block(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) block(i, j) = full(idx[i], idx[j]);

  const std::vector<StateVector> sector =
      evolve_exact(Operator(TensorShape{n}, block), StateVector(TensorShape{n}, sub), grid);
  std::vector<StateVector> out;
  out.reserve(sector.size());
  for (const StateVector& st : sector) {
    Vector v = Vector::Zero(s.dim());
    for (Index i = 0; i < n; ++i) v(idx[i]) = st.amplitudes()(i);
    out.emplace_back(s.shape(), std::move(v));
  }
  return out;
}

double transfer_time(const SystemParams& p) {
  const double chi = effective_params(p).chi;
  return std::numbers::pi / (std::sqrt(2.0) * kTwoPi * chi);
}

TimeGrid default_rabi_grid(const SystemParams& p) { return {0.0, 4.0 * transfer_time(p), 2001}; }

double conserved_excitation(const TimeSeries& series) {
  const std::vector<double>& k = series.channel("K");
  double drift = 0.0;
  for (double v : k) drift = std::max(drift, std::abs(v - k.front()));
  return drift;
}

double first_maximum_time(const TimeGrid& grid, const std::vector<double>& values) {
  const std::size_t n = values.size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (values[k] > values[k - 1] && values[k] >= values[k + 1]) {
      const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      const double offset = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
      return grid.time(static_cast<Index>(k)) + offset * grid.step();
    }
  }
  return grid.t_end;
}

FullVsEffective run_full_vs_effective(const SystemParams& p, const HilbertSpec& s, const TimeGrid& grid,
                                      DynamicsMethod method, const EvolveOptions& opts) {
  s.validate();
  grid.validate();
  FullVsEffective out;
  out.regime = validate_regime(p);

  const Operator h_full = build_H0(p, s) + build_HI(p, s);
  const StateVector psi0 = basis_state(Level::g, 1, 0, s);
  const std::vector<StateVector> full = method == DynamicsMethod::sector
                                            ? evolve_in_sector(h_full, psi0, s, 2, grid)
                                            : evolve(h_full, psi0, grid, opts);

  const Operator h_eff = build_H_eff(p, s);
  const std::vector<StateVector> eff = evolve_exact(h_eff, mode_basis_state(1, 0, s), grid);

  std::vector<double> p_g, na_f, nb_f, norm_f, k_f, na_e, nb_e, norm_e;
  for (const StateVector& st : full) {
    double pg = 0.0, na = 0.0, nb = 0.0, kk = 0.0, nn = 0.0;
    for (Level q : {Level::g, Level::r, Level::e}) {
      for (Index a = 0; a <= s.cutoff_a; ++a) {
        for (Index b = 0; b <= s.cutoff_b; ++b) {
          const double w = std::norm(st.amplitudes()(s.index(q, a, b)));
          nn += w;
          if (q == Level::g) pg += w;
          na += w * static_cast<double>(a);
          nb += w * static_cast<double>(b);
          kk += w * static_cast<double>(excitation_number(q, a, b));
        }
      }
    }
    p_g.push_back(pg);
    na_f.push_back(na);
    nb_f.push_back(nb);
    k_f.push_back(kk);
    norm_f.push_back(std::sqrt(nn));
  }
  for (const StateVector& st : eff) {
    double na = 0.0, nb = 0.0, nn = 0.0;
    for (Index a = 0; a <= s.cutoff_a; ++a) {
      for (Index b = 0; b <= s.cutoff_b; ++b) {
        const double w = std::norm(st.amplitudes()(s.mode_index(a, b)));
        nn += w;
        na += w * static_cast<double>(a);
        nb += w * static_cast<double>(b);
      }
    }
    na_e.push_back(na);
    nb_e.push_back(nb);
    norm_e.push_back(std::sqrt(nn));
  }

  out.full.grid = grid;
  out.full.channels = {{"P_g", p_g}, {"n_a", na_f}, {"n_b", nb_f}, {"norm", norm_f}, {"K", k_f}};
  out.eff.grid = grid;
  out.eff.channels = {{"n_a", na_e}, {"n_b", nb_e}, {"norm", norm_e}};

  DeviationSummary& sum = out.summary;
  for (std::size_t k = 0; k < p_g.size(); ++k) {
    sum.max_dev_n_a = std::max(sum.max_dev_n_a, std::abs(na_f[k] - na_e[k]));
    sum.max_dev_n_b = std::max(sum.max_dev_n_b, std::abs(nb_f[k] - nb_e[k]));
    sum.min_p_g = std::min(sum.min_p_g, p_g[k]);
    sum.norm_drift = std::max({sum.norm_drift, std::abs(norm_f[k] - 1.0), std::abs(norm_e[k] - 1.0)});
  }
  sum.transfer_time_full = first_maximum_time(grid, nb_f);
  sum.transfer_time_eff = first_maximum_time(grid, nb_e);
  sum.excitation_drift = conserved_excitation(out.full);
  return out;
}

}  // namespace pdc
