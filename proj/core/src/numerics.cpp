#include "tnqsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "tnqsim/errors.hpp"
#include "tnqsim/rng.hpp"

namespace tnqsim {

namespace {

using EigenMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EigenMap = Eigen::Map<const EigenMatrix>;

EigenMap map_of(const ComplexMatrix& m) {
  return EigenMap(m.entries.data(), static_cast<Eigen::Index>(m.rows),
                  static_cast<Eigen::Index>(m.cols));
}

ComplexMatrix from_eigen(const EigenMatrix& e) {
  ComplexMatrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  EigenMatrix::Map(out.entries.data(), e.rows(), e.cols()) = e;
  return out;
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
    : rows(rows), cols(cols), entries(std::move(data)) {
  if (entries.size() != rows * cols) {
    throw std::invalid_argument(
        fmt::format("matrix data size {} does not match {}x{}", entries.size(), rows, cols));
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

ComplexVector::ComplexVector(std::size_t dim, std::vector<Complex> data)
    : dim(dim), entries(std::move(data)) {
  if (entries.size() != dim) {
    throw std::invalid_argument(
        fmt::format("vector data size {} does not match dim {}", entries.size(), dim));
  }
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument(fmt::format("matmul dimension mismatch: {}x{} * {}x{}",
                                            a.rows, a.cols, b.rows, b.cols));
  }
  EigenMatrix r = map_of(a) * map_of(b);
  return from_eigen(r);
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows * b.rows, a.cols * b.cols);
  for (std::size_t ar = 0; ar < a.rows; ++ar) {
    for (std::size_t ac = 0; ac < a.cols; ++ac) {
      const Complex f = a.at(ar, ac);
      if (f == Complex{0.0, 0.0}) continue;
      for (std::size_t br = 0; br < b.rows; ++br) {
        for (std::size_t bc = 0; bc < b.cols; ++bc) {
          out.at(ar * b.rows + br, ac * b.cols + bc) = f * b.at(br, bc);
        }
      }
    }
  }
  return out;
}

ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols, a.rows);
  for (std::size_t r = 0; r < a.rows; ++r) {
    for (std::size_t c = 0; c < a.cols; ++c) {
      out.at(c, r) = std::conj(a.at(r, c));
    }
  }
  return out;
}

SvdResult svd(const ComplexMatrix& a) {
  const auto m = map_of(a);
  SvdResult out;
  // Jacobi is exact enough at small sizes; BDC scales to the larger bond
  // matrices of the MPS path.
  if (std::min(a.rows, a.cols) <= 8) {
    Eigen::JacobiSVD<EigenMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
      throw NumericalError(fmt::format("SVD failed to converge on a {}x{} matrix",
                                       a.rows, a.cols));
    }
    out.u = from_eigen(solver.matrixU());
    out.v_dagger = from_eigen(EigenMatrix(solver.matrixV().adjoint()));
    const auto& sv = solver.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
  } else {
    Eigen::BDCSVD<EigenMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
      throw NumericalError(fmt::format("SVD failed to converge on a {}x{} matrix",
                                       a.rows, a.cols));
    }
    out.u = from_eigen(solver.matrixU());
    out.v_dagger = from_eigen(EigenMatrix(solver.matrixV().adjoint()));
    const auto& sv = solver.singularValues();
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
  }
  return out;
}

bool is_unitary(const ComplexMatrix& a, double tol) {
  if (a.rows != a.cols) {
    throw std::invalid_argument(
        fmt::format("is_unitary requires a square matrix, got {}x{}", a.rows, a.cols));
  }
  const ComplexMatrix gram = matmul(adjoint(a), a);
  return max_abs_diff(gram, ComplexMatrix::identity(a.rows)) <= tol;
}

std::size_t numerical_rank(const std::vector<double>& singular_values, double rel_tol) {
  if (singular_values.empty()) return 0;
  const double cutoff = rel_tol * singular_values.front();
  std::size_t rank = 0;
  for (double s : singular_values) {
    if (s > cutoff) ++rank;
  }
  return rank;
}

ComplexMatrix swap_qubit_basis(const ComplexMatrix& m4) {
  if (m4.rows != 4 || m4.cols != 4) {
    throw std::invalid_argument("swap_qubit_basis expects a 4x4 matrix");
  }
  static const int perm[4] = {0, 2, 1, 3};
  ComplexMatrix out(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out.at(perm[r], perm[c]) = m4.at(r, c);
    }
  }
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("max_abs_diff shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    m = std::max(m, std::abs(a.entries[i] - b.entries[i]));
  }
  return m;
}

double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
  if (a.dim != b.dim) throw std::invalid_argument("max_abs_diff dim mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim; ++i) {
    m = std::max(m, std::abs(a.entries[i] - b.entries[i]));
  }
  return m;
}

double norm_squared(const ComplexVector& v) {
  double s = 0.0;
  for (const Complex& c : v.entries) s += std::norm(c);
  return s;
}

ComplexMatrix random_unitary(std::size_t dim, Rng& rng) {
  ComplexMatrix g(dim, dim);
  for (auto& e : g.entries) e = Complex{rng.next_gaussian(), rng.next_gaussian()};
  // Modified Gram-Schmidt; fixing the diagonal phase makes the draw Haar.
  std::vector<std::vector<Complex>> cols(dim, std::vector<Complex>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) cols[c][r] = g.at(r, c);
  }
  ComplexMatrix q(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      Complex proj = 0.0;
      for (std::size_t r = 0; r < dim; ++r) proj += std::conj(q.at(r, p)) * cols[c][r];
      for (std::size_t r = 0; r < dim; ++r) cols[c][r] -= proj * q.at(r, p);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < dim; ++r) nrm += std::norm(cols[c][r]);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw NumericalError("degenerate draw in random_unitary");
    // Phase convention: make the pivot entry real positive.
    Complex pivot = cols[c][c] / nrm;
    Complex phase = std::abs(pivot) > 1e-12 ? pivot / std::abs(pivot) : Complex{1.0, 0.0};
    for (std::size_t r = 0; r < dim; ++r) q.at(r, c) = cols[c][r] / (nrm * phase);
  }
  return q;
}

}  // namespace tnqsim
