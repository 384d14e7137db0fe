#pragma once

#include <cstddef>
#include <vector>

namespace randbal {

// Small dense row-major matrix. The toolkit's matrices are covariance and
// regression blocks of at most a few hundred columns, so a simple
// contiguous buffer beats pulling in a linear-algebra dependency.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

Matrix mat_mul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& v);
double dot(const std::vector<double>& a, const std::vector<double>& b);

// v' M v for symmetric M.
double quadratic_form(const Matrix& m, const std::vector<double>& v);

// Eigendecomposition A = V diag(values) V', eigenvalues descending,
// eigenvectors in the corresponding columns of `vectors`.
struct EigenSym {
  std::vector<double> values;
  Matrix vectors;
};

// Cyclic Jacobi for symmetric matrices. Sweeps until the largest
// off-diagonal magnitude falls below rel_tol times the largest absolute
// eigenvalue estimate. Simple, portable, and accurate at this scale.
EigenSym jacobi_eigen_symmetric(Matrix a, double rel_tol = 1e-12,
                                int max_sweeps = 100);

// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix
// via the Jacobi eigendecomposition. Eigenvalues at or below
// tolerance = n * machine-epsilon * lambda_max are treated as zero; rank
// counts those above it.
struct PsdPinv {
  Matrix pinv;
  int rank = 0;
  double tolerance = 0.0;
  double lambda_max = 0.0;
};
PsdPinv pseudo_inverse_psd(const Matrix& s);

// Solves A x = b for symmetric positive definite A by Cholesky.
// Returns false (leaving x untouched) when a pivot is not positive.
bool cholesky_solve(const Matrix& a, const std::vector<double>& b,
                    std::vector<double>& x);

// Greedy selection of linearly independent columns of X, scanned in input
// order. A column joins the kept set when its squared residual after
// projection onto the kept span exceeds tolerance = p * machine-epsilon *
// lambda_max(X'X), the same spectral cutoff the pseudoinverse uses.
// Columns with index < n_prefix are always kept (callers pass structurally
// independent columns, e.g. disjoint block indicators, as the prefix).
std::vector<std::size_t> independent_columns(const Matrix& x,
                                             std::size_t n_prefix = 0);

}  // namespace randbal
