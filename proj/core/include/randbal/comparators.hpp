#pragma once

#include <cstdint>
#include <vector>

#include "randbal/linalg.hpp"
#include "randbal/types.hpp"

namespace randbal {

struct LogisticOptions {
  double tol = 1e-10;     // relative deviance change declaring convergence
  int max_iter = 50;
  double coef_cap = 15.0; // |coef| beyond this reads as separation
  // Leading columns every caller guarantees independent (e.g. disjoint
  // block indicators); they are never dropped by the rank screen.
  std::size_t force_prefix = 0;
  // Skip the rank screen entirely; callers promise x has full column rank
  // (used by repeated fits on a prescreened matrix).
  bool assume_full_rank = false;
};

// Maximum-likelihood logistic fit by iteratively reweighted least squares
// with step halving. Reports rather than fails on quasi-separation: the
// fit that drove coefficients past coef_cap is returned with the flag set.
struct LogisticFit {
  std::vector<double> coef;  // one per input column; dropped columns get 0
  std::vector<char> dropped; // rank screen verdict per column
  double deviance = 0.0;
  bool converged = false;
  int iterations = 0;
  bool separation = false;
};

LogisticFit fit_logistic(const std::vector<std::uint8_t>& y, const Matrix& x,
                         const LogisticOptions& opt = {});

// Deviance of a fitted linear predictor against binary y (saturated model
// at zero).
double binomial_deviance(const std::vector<std::uint8_t>& y,
                         const std::vector<double>& eta);

// Likelihood-ratio balance test: does adding the covariates to a model of
// assignment on block indicators improve the fit? df counts the covariate
// columns that survive the rank screen given the indicators.
struct DevianceTest {
  double lrt = 0.0;
  int df = 0;
  double p = 1.0;
  double deviance_null = 0.0;
  double deviance_full = 0.0;
  bool separation = false;
};

// Prescreens the model matrices once so repeated tests against fresh
// assignments (simulation replicates) skip the rank work.
class DevianceTester {
 public:
  DevianceTester(const Design& design, const CovariateMatrix& x);

  int df() const { return df_; }
  DevianceTest run(const std::vector<std::uint8_t>& z) const;

 private:
  Matrix null_x_, full_x_;
  int df_ = 0;
};

DevianceTest deviance_balance_test(const Design& design,
                                   const CovariateMatrix& x,
                                   const std::vector<std::uint8_t>& z);

// The naive two-sample comparison over measurement units, clustering
// ignored: mean difference scaled by the overall covariate spread and
// the per-arm unit counts, read against the normal curve.
struct NoclusResult {
  double z = 0.0;
  double p = 1.0;
  bool degenerate = false;
};

NoclusResult noclus_z_test(const std::vector<double>& x_units,
                           const std::vector<std::uint8_t>& z_units);

}  // namespace randbal
