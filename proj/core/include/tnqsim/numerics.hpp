#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace tnqsim {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major. Used for gate payloads, SVD factors and
/// the dense oracle's operators.
struct ComplexMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> entries;  // rows * cols, row-major

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows(rows), cols(cols), entries(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data);

  Complex& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }
  const Complex& at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }

  static ComplexMatrix identity(std::size_t n);

  bool operator==(const ComplexMatrix& other) const = default;
};

/// Dense complex vector of standard-basis amplitudes.
struct ComplexVector {
  std::size_t dim = 0;
  std::vector<Complex> entries;

  ComplexVector() = default;
  explicit ComplexVector(std::size_t dim) : dim(dim), entries(dim) {}
  ComplexVector(std::size_t dim, std::vector<Complex> data);

  bool operator==(const ComplexVector& other) const = default;
};

/// Factors of a = u . diag(singular_values) . v_dagger with u, v_dagger thin
/// isometries and the singular values sorted descending.
struct SvdResult {
  ComplexMatrix u;
  std::vector<double> singular_values;
  ComplexMatrix v_dagger;
};

/// Standard matrix product. Throws std::invalid_argument on a dimension mismatch.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Kronecker product with a's index most significant:
/// result is (a.rows*b.rows) x (a.cols*b.cols).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& a);

/// Singular value decomposition. Throws NumericalError if the underlying
/// solver fails to converge.
SvdResult svd(const ComplexMatrix& a);

/// True iff ||a'a - I||_max <= tol. Throws std::invalid_argument for
/// non-square input.
bool is_unitary(const ComplexMatrix& a, double tol);

/// Count of singular values above rel_tol * max(singular value). This is the
/// rank tolerance used for Schmidt-rank counting.
std::size_t numerical_rank(const std::vector<double>& singular_values,
                           double rel_tol = 1e-10);

/// Reorder a 4x4 two-qubit gate from the |q_a q_b> basis to |q_b q_a>.
ComplexMatrix swap_qubit_basis(const ComplexMatrix& m4);

/// Max-norm of the entrywise difference. Shapes must match.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_diff(const ComplexVector& a, const ComplexVector& b);

/// Squared two-norm of a vector.
double norm_squared(const ComplexVector& v);

class Rng;

/// Haar-distributed unitary of the given dimension, drawn deterministically
/// from the generator (Gaussian matrix followed by Gram-Schmidt with the
/// R-diagonal phase fixed).
ComplexMatrix random_unitary(std::size_t dim, Rng& rng);

}  // namespace tnqsim
