#pragma once

// Small dense complex matrices for the MIMO game (N is expected to be <= 8).

#include <complex>
#include <cstddef>
#include <vector>

namespace qcontract::linalg {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(const std::vector<double>& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<Complex>& data() const { return data_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  double frobenius() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Complex s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);

/// Square matrix kept exactly Hermitian: construction replaces A by (A + A^H)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& m);

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  double trace() const { return m_.trace().real(); }
  double frobenius() const { return m_.frobenius(); }

 private:
  ComplexMatrix m_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns are eigenvectors
};

/// Cyclic complex Jacobi; stops when off(A) <= 1e-12 ||A||_F or after 100 sweeps.
EigenDecomposition herm_eig(const HermitianMatrix& a);

/// U diag(values) U^H
HermitianMatrix from_eigen(const ComplexMatrix& vectors, const std::vector<double>& values);

/// Solves A X = B for positive definite A (Cholesky).
ComplexMatrix psd_solve(const HermitianMatrix& a, const ComplexMatrix& b);

/// Natural-log determinant of a positive definite matrix.
double logdet_psd(const HermitianMatrix& a);

}  // namespace qcontract::linalg
