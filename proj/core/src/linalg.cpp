#include "randbal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace randbal {

Matrix mat_mul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& v) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) sum += a(i, j) * v[j];
    out[i] = sum;
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double quadratic_form(const Matrix& m, const std::vector<double>& v) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) row += m(i, j) * v[j];
    total += v[i] * row;
  }
  return total;
}

EigenSym jacobi_eigen_symmetric(Matrix a, double rel_tol, int max_sweeps) {
  const std::size_t n = a.rows();
  Matrix v = Matrix::identity(n);
  if (n > 0) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double off = 0.0;
      double scale = 0.0;
      for (std::size_t p = 0; p < n; ++p) {
        scale = std::max(scale, std::fabs(a(p, p)));
        for (std::size_t q = p + 1; q < n; ++q)
          off = std::max(off, std::fabs(a(p, q)));
      }
      if (off <= rel_tol * std::max(scale, off)) break;

      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::fabs(theta) > 1e150) {
            t = 0.5 / theta;
          } else {
            t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
            if (theta < 0.0) t = -t;
          }
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&a](std::size_t i, std::size_t j) {
    return a(i, i) > a(j, j);
  });

  EigenSym out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

PsdPinv pseudo_inverse_psd(const Matrix& s) {
  const std::size_t n = s.rows();
  PsdPinv out;
  out.pinv = Matrix(n, n);
  if (n == 0) return out;

  const EigenSym eig = jacobi_eigen_symmetric(s);
  out.lambda_max = std::max(0.0, eig.values.empty() ? 0.0 : eig.values.front());
  out.tolerance =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() * out.lambda_max;

  for (std::size_t e = 0; e < n; ++e) {
    const double lambda = eig.values[e];
    if (!(lambda > out.tolerance)) continue;
    ++out.rank;
    const double inv = 1.0 / lambda;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = eig.vectors(i, e);
      if (vi == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        out.pinv(i, j) += inv * vi * eig.vectors(j, e);
    }
  }
  return out;
}

bool cholesky_solve(const Matrix& a, const std::vector<double>& b,
                    std::vector<double>& x) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(sum > 0.0)) return false;
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
    y[i] = sum / l(i, i);
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double sum = y[i];
    for (std::size_t k = i + 1; k < n; ++k) sum -= l(k, i) * x[k];
    x[i] = sum / l(i, i);
  }
  return true;
}

std::vector<std::size_t> independent_columns(const Matrix& x,
                                             std::size_t n_prefix) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (p == 0) return {};

  Matrix gram(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) sum += x(r, i) * x(r, j);
      gram(i, j) = sum;
      gram(j, i) = sum;
    }
  }

  const EigenSym eig = jacobi_eigen_symmetric(gram);
  const double lambda_max =
      std::max(0.0, eig.values.empty() ? 0.0 : eig.values.front());
  const double tol =
      static_cast<double>(p) * std::numeric_limits<double>::epsilon() * lambda_max;

  std::vector<std::size_t> kept;
  std::vector<std::vector<double>> lrows;  // Cholesky rows over kept columns
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> y(kept.size());
    for (std::size_t t = 0; t < kept.size(); ++t) {
      double sum = gram(kept[t], j);
      for (std::size_t u = 0; u < t; ++u) sum -= lrows[t][u] * y[u];
      y[t] = sum / lrows[t][t];
    }
    double resid = gram(j, j);
    for (const double yi : y) resid -= yi * yi;
    const bool forced = j < n_prefix;
    if (!forced && !(resid > tol)) continue;
    if (resid < 1e-300) resid = 1e-300;
    y.push_back(std::sqrt(resid));
    kept.push_back(j);
    lrows.push_back(std::move(y));
  }
  return kept;
}

}  // namespace randbal
