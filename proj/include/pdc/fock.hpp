#pragma once

// Truncated Fock-space and tensor-product operator algebra.
//
// The full Hilbert space is ordered qubit ⊗ mode_a ⊗ mode_b with row-major
// indexing: index = (q * (cutoff_a + 1) + n_a) * (cutoff_b + 1) + n_b.
// Qubit levels are g = 0, r = 1, e = 2.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <string_view>
#include <vector>

namespace pdc {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Level { g = 0, r = 1, e = 2 };
enum class Slot { qubit, mode_a, mode_b };

/// Parses "g", "r" or "e"; anything else is an invalid-argument.
Level parse_level(std::string_view label);
char level_label(Level level);

/// Factor dimensions of a tensor-product space, outermost factor first.
using TensorShape = std::vector<Index>;

Index total_dim(const TensorShape& shape);

struct HilbertSpec {
  static constexpr Index qubit_dim = 3;

  Index cutoff_a = 1;
  Index cutoff_b = 2;

  Index dim_a() const { return cutoff_a + 1; }
  Index dim_b() const { return cutoff_b + 1; }
  Index mode_dim() const { return dim_a() * dim_b(); }
  Index dim() const { return qubit_dim * mode_dim(); }
  Index local_dim(Slot slot) const;

  /// Full-space shape {3, cutoff_a + 1, cutoff_b + 1}.
  TensorShape shape() const { return {qubit_dim, dim_a(), dim_b()}; }
  /// Two-mode shape {cutoff_a + 1, cutoff_b + 1} for effective models.
  TensorShape mode_shape() const { return {dim_a(), dim_b()}; }

  Index index(Level q, Index n_a, Index n_b) const;
  Index mode_index(Index n_a, Index n_b) const;

  /// Throws invalid-argument unless cutoff_a >= 1 and cutoff_b >= 2.
  void validate() const;

  friend bool operator==(const HilbertSpec&, const HilbertSpec&) = default;
};

/// A complex matrix on a truncated tensor-product space. Immutable after
/// construction; arithmetic returns new values.
class Operator {
 public:
  Operator(TensorShape shape, SparseMatrix matrix);
  Operator(TensorShape shape, const DenseMatrix& matrix);

  static Operator zero(TensorShape shape);
  static Operator identity(TensorShape shape);

  const TensorShape& shape() const { return shape_; }
  Index dim() const { return matrix_.rows(); }
  const SparseMatrix& matrix() const { return matrix_; }
  DenseMatrix dense() const { return DenseMatrix(matrix_); }
  Complex element(Index row, Index col) const { return matrix_.coeff(row, col); }

  Operator adjoint() const;
  bool is_hermitian(double tol = 1e-12) const;
  /// Largest absolute entry.
  double max_abs() const;
  double frobenius_norm() const { return matrix_.norm(); }

  friend Operator operator+(const Operator& lhs, const Operator& rhs);
  friend Operator operator-(const Operator& lhs, const Operator& rhs);
  friend Operator operator*(const Operator& lhs, const Operator& rhs);
  friend Operator operator*(Complex scale, const Operator& op);
  friend Operator operator*(const Operator& op, Complex scale) { return scale * op; }
  friend Operator operator-(const Operator& op) { return Complex(-1.0) * op; }

 private:
  TensorShape shape_;
  SparseMatrix matrix_;
};

Operator commutator(const Operator& lhs, const Operator& rhs);

class StateVector {
 public:
  StateVector(TensorShape shape, Vector amplitudes);

  const TensorShape& shape() const { return shape_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }

 private:
  TensorShape shape_;
  Vector amplitudes_;
};

class DensityMatrix {
 public:
  DensityMatrix(TensorShape shape, DenseMatrix entries);

  const TensorShape& shape() const { return shape_; }
  const DenseMatrix& entries() const { return entries_; }
  Index dim() const { return entries_.rows(); }

  Complex trace() const { return entries_.trace(); }
  /// Largest entrywise deviation from Hermiticity.
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;

 private:
  TensorShape shape_;
  DenseMatrix entries_;
};

/// Single-mode lowering operator on {|0>, ..., |cutoff>}.
Operator annihilation(Index cutoff);
Operator creation(Index cutoff);
Operator number(Index cutoff);

/// |i><j| on the three-level qubit.
Operator qubit_transition(Level i, Level j);
Operator qubit_transition(std::string_view i, std::string_view j);

/// Kronecker product of sparse matrices.
SparseMatrix kron(const SparseMatrix& lhs, const SparseMatrix& rhs);

/// Places a single-factor operator into the qubit ⊗ mode_a ⊗ mode_b space.
Operator embed(const Operator& op, Slot slot, const HilbertSpec& spec);
/// Places a single-mode operator into the two-mode space mode_a ⊗ mode_b.
Operator embed_mode(const Operator& op, Slot slot, const HilbertSpec& spec);

StateVector basis_state(Level q, Index n_a, Index n_b, const HilbertSpec& spec);
StateVector mode_basis_state(Index n_a, Index n_b, const HilbertSpec& spec);

Complex expectation(const StateVector& state, const Operator& op);
Complex expectation(const DensityMatrix& rho, const Operator& op);

}  // namespace pdc
