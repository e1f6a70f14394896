#include "pdc/fock.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pdc {

namespace {

void require_same_shape(const TensorShape& lhs, const TensorShape& rhs, const char* what) {
  if (lhs != rhs) {
    throw std::invalid_argument(std::string(what) + ": operator dimensions do not match");
  }
}

}  // namespace

Level parse_level(std::string_view label) {
  if (label == "g") return Level::g;
  if (label == "r") return Level::r;
  if (label == "e") return Level::e;
  throw std::invalid_argument("unknown qubit level '" + std::string(label) + "' (expected g, r or e)");
}

char level_label(Level level) {
  switch (level) {
    case Level::g: return 'g';
    case Level::r: return 'r';
    case Level::e: return 'e';
  }
  return '?';
}

Index total_dim(const TensorShape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

Index HilbertSpec::local_dim(Slot slot) const {
  switch (slot) {
    case Slot::qubit: return qubit_dim;
    case Slot::mode_a: return dim_a();
    case Slot::mode_b: return dim_b();
  }
  return 0;
}

Index HilbertSpec::index(Level q, Index n_a, Index n_b) const {
  return (static_cast<Index>(q) * dim_a() + n_a) * dim_b() + n_b;
}

Index HilbertSpec::mode_index(Index n_a, Index n_b) const { return n_a * dim_b() + n_b; }

void HilbertSpec::validate() const {
  if (cutoff_a < 1) {
    throw std::invalid_argument("cutoff_a must be >= 1, got " + std::to_string(cutoff_a));
  }
  if (cutoff_b < 2) {
    throw std::invalid_argument("cutoff_b must be >= 2, got " + std::to_string(cutoff_b));
  }
}

Operator::Operator(TensorShape shape, SparseMatrix matrix)
    : shape_(std::move(shape)), matrix_(std::move(matrix)) {
  const Index n = total_dim(shape_);
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw std::invalid_argument("operator matrix is " + std::to_string(matrix_.rows()) + "x" +
                                std::to_string(matrix_.cols()) + " but its shape implies " +
                                std::to_string(n));
  }
  matrix_.prune(Complex(0.0));
  matrix_.makeCompressed();
}

Operator::Operator(TensorShape shape, const DenseMatrix& matrix)
    : Operator(std::move(shape), SparseMatrix(matrix.sparseView())) {}

Operator Operator::zero(TensorShape shape) {
  const Index n = total_dim(shape);
  return Operator(std::move(shape), SparseMatrix(n, n));
}

Operator Operator::identity(TensorShape shape) {
  const Index n = total_dim(shape);
  SparseMatrix id(n, n);
  id.setIdentity();
  return Operator(std::move(shape), std::move(id));
}

Operator Operator::adjoint() const { return Operator(shape_, SparseMatrix(matrix_.adjoint())); }

bool Operator::is_hermitian(double tol) const {
  const SparseMatrix diff = matrix_ - SparseMatrix(matrix_.adjoint());
  for (Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      if (std::abs(it.value()) > tol) return false;
    }
  }
  return true;
}

double Operator::max_abs() const {
  double m = 0.0;
  for (Index k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

Operator operator+(const Operator& lhs, const Operator& rhs) {
  require_same_shape(lhs.shape_, rhs.shape_, "operator+");
  return Operator(lhs.shape_, SparseMatrix(lhs.matrix_ + rhs.matrix_));
}

Operator operator-(const Operator& lhs, const Operator& rhs) {
  require_same_shape(lhs.shape_, rhs.shape_, "operator-");
  return Operator(lhs.shape_, SparseMatrix(lhs.matrix_ - rhs.matrix_));
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_shape(lhs.shape_, rhs.shape_, "operator*");
  return Operator(lhs.shape_, SparseMatrix(lhs.matrix_ * rhs.matrix_));
}

Operator operator*(Complex scale, const Operator& op) {
  return Operator(op.shape_, SparseMatrix(scale * op.matrix_));
}

Operator commutator(const Operator& lhs, const Operator& rhs) { return lhs * rhs - rhs * lhs; }

StateVector::StateVector(TensorShape shape, Vector amplitudes)
    : shape_(std::move(shape)), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != total_dim(shape_)) {
    throw std::invalid_argument("state vector length does not match its shape");
  }
}

DensityMatrix::DensityMatrix(TensorShape shape, DenseMatrix entries)
    : shape_(std::move(shape)), entries_(std::move(entries)) {
  const Index n = total_dim(shape_);
  if (entries_.rows() != n || entries_.cols() != n) {
    throw std::invalid_argument("density matrix size does not match its shape");
  }
}

double DensityMatrix::hermiticity_error() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const DenseMatrix herm = 0.5 * (entries_ + entries_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Operator annihilation(Index cutoff) {
  if (cutoff < 1) {
    throw std::invalid_argument("annihilation: cutoff must be >= 1, got " + std::to_string(cutoff));
  }
  const Index n = cutoff + 1;
  SparseMatrix m(n, n);
  m.reserve(Eigen::VectorXi::Constant(n, 1));
  for (Index k = 1; k <= cutoff; ++k) m.insert(k - 1, k) = std::sqrt(static_cast<double>(k));
  return Operator({n}, std::move(m));
}

Operator creation(Index cutoff) { return annihilation(cutoff).adjoint(); }

Operator number(Index cutoff) {
  const Operator a = annihilation(cutoff);
  return a.adjoint() * a;
}

Operator qubit_transition(Level i, Level j) {
  SparseMatrix m(HilbertSpec::qubit_dim, HilbertSpec::qubit_dim);
  m.insert(static_cast<Index>(i), static_cast<Index>(j)) = 1.0;
  return Operator({HilbertSpec::qubit_dim}, std::move(m));
}

Operator qubit_transition(std::string_view i, std::string_view j) {
  return qubit_transition(parse_level(i), parse_level(j));
}

SparseMatrix kron(const SparseMatrix& lhs, const SparseMatrix& rhs) {
  SparseMatrix out = Eigen::kroneckerProduct(lhs, rhs);
  out.makeCompressed();
  return out;
}

namespace {

SparseMatrix sparse_identity(Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

void require_local(const Operator& op, Index local, const char* where) {
  if (op.shape().size() != 1 || op.dim() != local) {
    throw std::invalid_argument(std::string(where) + ": operator of dimension " +
                                std::to_string(op.dim()) + " does not fit a factor of dimension " +
                                std::to_string(local));
  }
}

}  // namespace

Operator embed(const Operator& op, Slot slot, const HilbertSpec& spec) {
  require_local(op, spec.local_dim(slot), "embed");
  const SparseMatrix iq = sparse_identity(spec.qubit_dim);
  const SparseMatrix ia = sparse_identity(spec.dim_a());
  const SparseMatrix ib = sparse_identity(spec.dim_b());
  switch (slot) {
    case Slot::qubit: return Operator(spec.shape(), kron(kron(op.matrix(), ia), ib));
    case Slot::mode_a: return Operator(spec.shape(), kron(kron(iq, op.matrix()), ib));
    case Slot::mode_b: return Operator(spec.shape(), kron(kron(iq, ia), op.matrix()));
  }
  throw std::invalid_argument("embed: unknown slot");
}

Operator embed_mode(const Operator& op, Slot slot, const HilbertSpec& spec) {
  if (slot == Slot::qubit) throw std::invalid_argument("embed_mode: the two-mode space has no qubit factor");
  require_local(op, spec.local_dim(slot), "embed_mode");
  if (slot == Slot::mode_a) return Operator(spec.mode_shape(), kron(op.matrix(), sparse_identity(spec.dim_b())));
  return Operator(spec.mode_shape(), kron(sparse_identity(spec.dim_a()), op.matrix()));
}

StateVector basis_state(Level q, Index n_a, Index n_b, const HilbertSpec& spec) {
  if (n_a < 0 || n_a > spec.cutoff_a || n_b < 0 || n_b > spec.cutoff_b) {
    throw std::invalid_argument("basis_state: occupation (" + std::to_string(n_a) + ", " +
                                std::to_string(n_b) + ") outside cutoffs (" +
                                std::to_string(spec.cutoff_a) + ", " + std::to_string(spec.cutoff_b) + ")");
  }
  Vector v = Vector::Zero(spec.dim());
  v(spec.index(q, n_a, n_b)) = 1.0;
  return StateVector(spec.shape(), std::move(v));
}

StateVector mode_basis_state(Index n_a, Index n_b, const HilbertSpec& spec) {
  if (n_a < 0 || n_a > spec.cutoff_a || n_b < 0 || n_b > spec.cutoff_b) {
    throw std::invalid_argument("mode_basis_state: occupation outside cutoffs");
  }
  Vector v = Vector::Zero(spec.mode_dim());
  v(spec.mode_index(n_a, n_b)) = 1.0;
  return StateVector(spec.mode_shape(), std::move(v));
}

Complex expectation(const StateVector& state, const Operator& op) {
  require_same_shape(state.shape(), op.shape(), "expectation");
  const Vector applied = op.matrix() * state.amplitudes();
  return state.amplitudes().dot(applied);
}

Complex expectation(const DensityMatrix& rho, const Operator& op) {
  require_same_shape(rho.shape(), op.shape(), "expectation");
  // Tr(rho M) = sum_{ij} rho_ji M_ij
  Complex acc = 0.0;
  const SparseMatrix& m = op.matrix();
  for (Index k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) acc += rho.entries()(it.col(), it.row()) * it.value();
  }
  return acc;
}

}  // namespace pdc
