#pragma once

#include <cstdint>
#include <vector>

#include "randbal/assignment.hpp"
#include "randbal/linalg.hpp"
#include "randbal/rng.hpp"
#include "randbal/types.hpp"
#include "randbal/weights.hpp"

namespace randbal {

std::vector<std::uint8_t> observed_assignment(const Design& design);

// The balance statistic d(z, x) for one covariate of cluster totals:
// within each block, the difference between treated and control per-unit
// means (arm totals over m_bar times arm cluster count), pooled across
// blocks with the given weights. Linear in x, and antisymmetric under
// swapping arms in every block of even split.
double compute_d(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z, const Weights& w);

// Same contrast, but each arm's total is divided by the measurement units
// actually assigned to that arm under z rather than by the block-average
// size. Descriptive companion to d; not the statistic the variance below
// refers to.
double compute_dp(const Design& design, const std::vector<double>& x,
                  const std::vector<std::uint8_t>& z, const Weights& w);

// Exact covariance matrix of the d vector over the blocked randomization:
// entry (i, j) sums w_b^2 * s_b(x_i, x_j) / (h_b * m_bar_b^2) over blocks,
// with s_b the within-block covariance of cluster totals (n_b - 1
// denominator). Depends only on the design, never on z.
Matrix variance_d(const Design& design, const CovariateMatrix& x,
                  const Weights& w);
double variance_of_d(const Design& design, const std::vector<double>& x,
                     const Weights& w);

struct ZP {
  double z = 0.0;
  double p = 1.0;
  bool degenerate = false;  // variance not positive; z and p are NaN
};
ZP z_and_normal_p(double d, double variance, bool one_sided = false);

// The unweighted pooled contrast that ignores clustering: block
// differences of cluster totals combined with weights proportional to
// h_b. Equals the least-squares coefficient of z when x is regressed on
// z plus block indicators.
double d_noclus(const Design& design, const std::vector<double>& x,
                const std::vector<std::uint8_t>& z);

// d_noclus scaled by the pooled standard deviation of cluster totals
// across arms (two-sample-t convention, pooled over all analyzed
// clusters). Degenerate when either arm has fewer than two clusters or
// the pooled spread is zero.
struct StdDiff {
  double value = 0.0;
  bool degenerate = false;
};
StdDiff std_diff(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z);

// Evaluates the whole d vector for many assignments against one design,
// covariate set, and weighting. Block constants are folded once, so each
// call costs one pass over the treated clusters. Copy per thread; eval
// uses internal scratch.
class DEvaluator {
 public:
  DEvaluator(const Design& design, const CovariateMatrix& x, const Weights& w);

  std::size_t dims() const { return k_; }

  // out must hold dims() doubles.
  void eval(const std::vector<std::uint8_t>& z, double* out);

 private:
  const CovariateMatrix* x_;
  std::size_t k_ = 0;
  std::vector<std::size_t> cluster_block_;  // block of each cluster
  std::vector<double> treated_coef_;        // per block
  std::vector<double> constant_;            // per covariate, z-free part
};

enum class MidPMode { exact, monte_carlo };

struct MidPOptions {
  MidPMode mode = MidPMode::monte_carlo;
  std::uint64_t replicates = 100'000;  // Monte Carlo only, at least 100
  SeedSpec seed{};
  std::uint64_t exact_cap = default_enumeration_cap;
};

// Mid-p of a two-sided randomization test: the chance of a strictly more
// extreme statistic plus half the chance of an equally extreme one, under
// uniform re-randomization of the design. Ties are read with a tolerance
// scaled to the observed value plus a floor at the covariate's scale, so
// exactly-tied reference values (a constant covariate, say) are split
// rather than double counted.
struct MidPResult {
  double value = 1.0;
  double stderr_est = 0.0;       // 0 under enumeration
  std::uint64_t replicates = 0;  // assignments evaluated
  bool exact = false;
};

struct BatchMidP {
  std::vector<MidPResult> covariate;  // one per column of x
  MidPResult quadratic;               // filled when a kernel was supplied
  bool has_quadratic = false;
};

// One pass over the randomization distribution serving every covariate,
// and optionally the quadratic omnibus statistic d' K d for a symmetric
// kernel K (larger means more extreme). Monte Carlo draws replicate r
// from its own substream, so results do not depend on thread count.
BatchMidP mid_p_batch(const Design& design, const CovariateMatrix& x,
                      const std::vector<std::uint8_t>& z_obs, const Weights& w,
                      const MidPOptions& opt,
                      const Matrix* quad_kernel = nullptr);

MidPResult mid_p(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z_obs, const Weights& w,
                 const MidPOptions& opt);

}  // namespace randbal
