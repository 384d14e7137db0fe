#include "randbal/comparators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randbal/common.hpp"
#include "randbal/stats.hpp"

namespace randbal {
namespace {

double log1pexp(double eta) {
  return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double sigmoid(double eta) {
  return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta))
                  : std::exp(eta) / (1.0 + std::exp(eta));
}

Matrix keep_columns(const Matrix& x, const std::vector<std::size_t>& cols) {
  Matrix out(x.rows(), cols.size());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < cols.size(); ++j) out(r, j) = x(r, cols[j]);
  return out;
}

}  // namespace

double binomial_deviance(const std::vector<std::uint8_t>& y,
                         const std::vector<double>& eta) {
  double dev = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    dev += log1pexp(eta[i]) - (y[i] ? eta[i] : 0.0);
  return 2.0 * dev;
}

LogisticFit fit_logistic(const std::vector<std::uint8_t>& y, const Matrix& x,
                         const LogisticOptions& opt) {
  const std::size_t n = x.rows();
  const std::size_t p_all = x.cols();
  if (y.size() != n)
    throw InputError("response length does not match the model matrix");

  std::vector<std::size_t> kept;
  if (opt.assume_full_rank) {
    kept.resize(p_all);
    for (std::size_t j = 0; j < p_all; ++j) kept[j] = j;
  } else {
    kept = independent_columns(x, opt.force_prefix);
  }
  const Matrix xk =
      kept.size() == p_all ? x : keep_columns(x, kept);
  const std::size_t p = kept.size();

  LogisticFit fit;
  fit.coef.assign(p_all, 0.0);
  fit.dropped.assign(p_all, 1);
  for (std::size_t j : kept) fit.dropped[j] = 0;

  std::vector<double> beta(p, 0.0), eta(n, 0.0), prob(n), grad(p), delta(p);
  std::vector<double> eta_try(n), beta_try(p);
  double dev = binomial_deviance(y, eta);
  Matrix hess(p, p);

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    fit.iterations = iter;
    for (std::size_t i = 0; i < n; ++i) prob[i] = sigmoid(eta[i]);

    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.data(), hess.data() + p * p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = (y[i] ? 1.0 : 0.0) - prob[i];
      const double w = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
      const double* row = xk.data() + i * p;
      for (std::size_t a = 0; a < p; ++a) {
        grad[a] += row[a] * resid;
        for (std::size_t b = a; b < p; ++b)
          hess(a, b) += w * row[a] * row[b];
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < a; ++b) hess(a, b) = hess(b, a);

    if (!cholesky_solve(hess, grad, delta))
      delta = mat_vec(pseudo_inverse_psd(hess).pinv, grad);

    // Step halving keeps the deviance from ever increasing.
    double step = 1.0, dev_try = dev;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      for (std::size_t a = 0; a < p; ++a)
        beta_try[a] = beta[a] + step * delta[a];
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = xk.data() + i * p;
        double e = 0.0;
        for (std::size_t a = 0; a < p; ++a) e += row[a] * beta_try[a];
        eta_try[i] = e;
      }
      dev_try = binomial_deviance(y, eta_try);
      if (dev_try <= dev + 1e-12) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;  // stalled against numerics

    const double change = dev - dev_try;
    beta.swap(beta_try);
    eta.swap(eta_try);
    dev = dev_try;
    if (change <= opt.tol * (std::fabs(dev) + 1.0)) {
      fit.converged = true;
      break;
    }
  }

  fit.deviance = dev;
  for (std::size_t j = 0; j < p; ++j) {
    fit.coef[kept[j]] = beta[j];
    if (std::fabs(beta[j]) > opt.coef_cap) fit.separation = true;
  }
  return fit;
}

DevianceTester::DevianceTester(const Design& design, const CovariateMatrix& x) {
  const std::size_t n = design.n_clusters();
  const std::size_t n_blocks = design.blocks.size();
  const std::size_t k = x.cols();
  if (x.n_rows != n)
    throw InputError("covariate rows do not match cluster count");

  Matrix full(n, n_blocks + k);
  for (std::size_t c = 0; c < n; ++c) {
    full(c, design.block_index[c]) = 1.0;
    for (std::size_t j = 0; j < k; ++j) full(c, n_blocks + j) = x.at(c, j);
  }
  const auto kept = independent_columns(full, n_blocks);
  df_ = static_cast<int>(kept.size() - n_blocks);

  null_x_ = Matrix(n, n_blocks);
  for (std::size_t c = 0; c < n; ++c) null_x_(c, design.block_index[c]) = 1.0;
  full_x_ = Matrix(n, kept.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < kept.size(); ++j)
      full_x_(r, j) = full(r, kept[j]);
}

DevianceTest DevianceTester::run(const std::vector<std::uint8_t>& z) const {
  LogisticOptions opt;
  opt.assume_full_rank = true;

  const LogisticFit null_fit = fit_logistic(z, null_x_, opt);
  const LogisticFit full_fit = fit_logistic(z, full_x_, opt);

  DevianceTest t;
  t.deviance_null = null_fit.deviance;
  t.deviance_full = full_fit.deviance;
  t.lrt = std::max(null_fit.deviance - full_fit.deviance, 0.0);
  t.df = df_;
  t.separation = null_fit.separation || full_fit.separation;
  t.p = df_ >= 1 ? chi2_sf(t.lrt, df_) : 1.0;
  return t;
}

DevianceTest deviance_balance_test(const Design& design,
                                   const CovariateMatrix& x,
                                   const std::vector<std::uint8_t>& z) {
  return DevianceTester(design, x).run(z);
}

NoclusResult noclus_z_test(const std::vector<double>& x_units,
                           const std::vector<std::uint8_t>& z_units) {
  if (x_units.size() != z_units.size())
    throw InputError("covariate and assignment lengths differ");
  const std::size_t n = x_units.size();
  std::size_t n_t = 0;
  for (std::uint8_t zi : z_units) n_t += zi ? 1 : 0;
  const std::size_t n_c = n - n_t;
  if (n < 2 || n_t == 0 || n_c == 0)
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN(), true};

  double mean_all = 0.0, mean_t = 0.0, mean_c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_all += x_units[i];
    (z_units[i] ? mean_t : mean_c) += x_units[i];
  }
  mean_all /= static_cast<double>(n);
  mean_t /= static_cast<double>(n_t);
  mean_c /= static_cast<double>(n_c);

  double ss = 0.0;
  for (double v : x_units) ss += (v - mean_all) * (v - mean_all);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0))
    return {std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::quiet_NaN(), true};

  const double scale =
      sd * std::sqrt(1.0 / static_cast<double>(n_t) +
                     1.0 / static_cast<double>(n_c));
  const double z = (mean_t - mean_c) / scale;
  return {z, two_sided_normal_p(z), false};
}

}  // namespace randbal
