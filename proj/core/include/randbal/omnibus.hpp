#pragma once

#include <cstdint>
#include <vector>

#include "randbal/balance.hpp"
#include "randbal/linalg.hpp"
#include "randbal/types.hpp"
#include "randbal/weights.hpp"

namespace randbal {

// All covariates at once: d' C^+ d, with C the exact randomization
// covariance of the d vector and C^+ its Moore-Penrose inverse. Behaves
// like chi-square on rank(C) degrees of freedom when the normal
// approximation holds, and is invariant under invertible linear
// recombination of the covariates.
struct OmnibusResult {
  double d2 = 0.0;
  int df = 0;
  double p_chi2 = 1.0;          // NaN when degenerate
  double rank_tolerance = 0.0;  // eigenvalue cutoff that set df
  bool degenerate = false;      // df == 0: no variation to test against
};

// The z-independent pieces, computed once per (design, covariates,
// weights) and reused across observed data and simulation replicates.
struct OmnibusContext {
  Matrix cov;
  Matrix pinv;
  int df = 0;
  double tolerance = 0.0;
  double lambda_max = 0.0;
};

OmnibusContext make_omnibus_context(const Design& design,
                                    const CovariateMatrix& x,
                                    const Weights& w);

// The d vector itself (one entry per covariate column).
std::vector<double> d_vector(const Design& design, const CovariateMatrix& x,
                             const std::vector<std::uint8_t>& z,
                             const Weights& w);

double d2_of(const OmnibusContext& ctx, const std::vector<double>& d);

OmnibusResult compute_d2(const OmnibusContext& ctx,
                         const std::vector<double>& d);

// Context construction, d vector, and the chi-square reading in one call.
OmnibusResult omnibus_test(const Design& design, const CovariateMatrix& x,
                           const std::vector<std::uint8_t>& z,
                           const Weights& w);

// Randomization mid-p of d2, larger values more extreme. Shares the
// mid-p tie convention of the per-covariate tests.
MidPResult d2_mid_p(const Design& design, const CovariateMatrix& x,
                    const std::vector<std::uint8_t>& z_obs, const Weights& w,
                    const OmnibusContext& ctx, const MidPOptions& opt);

}  // namespace randbal
