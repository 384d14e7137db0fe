#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "randbal/rng.hpp"
#include "randbal/types.hpp"
#include "randbal/weights.hpp"

namespace randbal {

// --- stratification evaluation ---------------------------------------

// How much randomization spread a design leaves in a covariate: the
// standard deviation of d under harmonic-star weights, as a fraction of
// the spread of x_i / m_bar_{b(i)} across all analyzed clusters. An
// unstratified design gives exactly 1/sqrt(h); perfect blocking on x
// gives 0. Throws DesignError when the covariate has no spread to
// measure against.
double balance_ratio(const Design& design, const std::vector<double>& x);

// Splits a treated total across candidate blocks proportionally to block
// size (largest remainder), then repairs the result into [1, n_b - 1] per
// block. Blocks of one cluster get 0 (they cannot be split) and are
// reported by the caller as unusable. Throws DesignError when the total
// cannot be placed at all.
std::vector<std::size_t> apportion_treated(
    const std::vector<std::size_t>& block_sizes, std::size_t total_treated);

// A hypothetical stratification of the same clusters: one block label per
// cluster row, in the caller's row order.
struct Candidate {
  std::string name;
  std::vector<std::string> labels;
};

struct CandidateRow {
  std::string candidate;
  std::vector<double> ratios;  // one per covariate
  std::vector<std::string> warnings;
};

struct CompareResult {
  std::vector<std::string> covariates;
  std::vector<CandidateRow> rows;
};

// Re-blocks the clusters by each candidate, apportions the treated total,
// and reports balance_ratio per (candidate, covariate). Ties are left to
// the reader; nothing is chosen.
CompareResult compare_stratifications(
    const std::vector<ClusterRecord>& clusters,
    const std::vector<std::string>& covariate_names,
    const std::vector<Candidate>& candidates, std::size_t total_treated);

// --- synthetic designs and covariates ---------------------------------

struct BlockSpec {
  std::size_t n = 2;
  std::size_t n_treated = 1;
  std::size_t repeat = 1;
};

struct ClusterSizeGen {
  enum class Kind { fixed, uniform_int, lognormal_int };
  Kind kind = Kind::fixed;
  double value = 1.0;              // fixed
  std::uint64_t lo = 1, hi = 1;    // uniform_int, inclusive
  double log_mean = 0.0, log_sd = 1.0;  // lognormal_int
  std::uint64_t min = 1;
};

// Covariates are generated per measurement unit and rolled up to cluster
// totals, so skew in unit-level rates carries into the totals the tests
// see. categorical emits levels-1 indicator columns (first level dropped).
struct CovariateGen {
  enum class Kind { normal, lognormal, bernoulli, binomial_rate, categorical };
  Kind kind = Kind::normal;
  std::string name = "x";
  double sigma = 1.0;                     // lognormal: exp(sigma * N(0,1))
  double p = 0.5;                         // bernoulli
  double rate_alpha = 2.0, rate_beta = 4.0;  // binomial_rate: Beta cluster rate
  std::size_t levels = 2;                 // categorical
  double zipf = 0.0;                      // categorical skew exponent
};

struct GeneratedStudyData {
  std::vector<ClusterRecord> clusters;  // block-major, observed counts set
  CovariateMatrix totals;               // rows in cluster order
  std::vector<double> unit_x0;          // unit-level first covariate
  std::vector<std::size_t> unit_cluster;
};

// Pure function of the seed: sizes from one substream, each covariate
// from its own, so adding a covariate never reshuffles the others.
GeneratedStudyData generate_study_data(const std::vector<BlockSpec>& blocks,
                                       const ClusterSizeGen& sizes,
                                       const std::vector<CovariateGen>& covs,
                                       SeedSpec seed);

// --- test-size simulation ---------------------------------------------

struct SizeStudySpec {
  std::uint64_t replicates = 10'000;  // at least 10^4
  SeedSpec seed{};
  std::vector<double> levels{0.01, 0.05, 0.10};
  // Any of: "d2" (omnibus against chi-square), "logistic" (deviance LRT),
  // "noclus" (unit-level z on the first covariate), "control" (rejects a
  // uniform draw, calibrating the harness itself).
  std::vector<std::string> tests{"d2"};
  std::vector<BlockSpec> blocks;
  ClusterSizeGen sizes;
  std::vector<CovariateGen> covariates;
  WeightKind weights = WeightKind::harmonic_star;
};

struct SizeRow {
  std::string test;
  double nominal = 0.0;
  double actual = 0.0;
  double stderr_est = 0.0;
  std::uint64_t rejected = 0;
  std::uint64_t evaluated = 0;  // replicates with a usable p-value
};

struct TestPValues {
  std::string test;
  std::vector<double> sorted_p;  // ascending; QQ plot data
};

struct SizeStudyResult {
  std::vector<SizeRow> rows;
  std::vector<TestPValues> p_values;
  std::uint64_t replicates = 0;
  std::uint64_t separations = 0;  // logistic replicates that separated
  int d2_df = -1;                 // realized omnibus rank
  int logistic_df = -1;           // realized LRT degrees of freedom
};

// Redraws the assignment under the uniform law and tallies how often each
// test rejects at each nominal level. Replicate-parallel; results are a
// pure function of the spec.
SizeStudyResult run_size_study(const SizeStudySpec& spec);

// --- local power against a tilted assignment law ----------------------

// Finite-sample noncentrality of the one-sided d test against the
// exponential tilt with slope beta on x:
// beta * sum_b w_b s^2(x_b)/m_bar_b / sqrt(Var(d)). Linear in beta, and
// harmonic-star weighting maximizes it over weight choices.
double delta_hat(const Design& design, const std::vector<double>& x,
                 const Weights& w, double beta);

struct PowerStudySpec {
  std::uint64_t replicates = 10'000;
  SeedSpec seed{};
  double z_star = 1.645;  // one-sided critical value
  std::vector<double> betas{0.0};
  std::vector<WeightKind> weights{WeightKind::harmonic_star};
  std::vector<BlockSpec> blocks;
  ClusterSizeGen sizes;
  // The generated covariate is centered and rescaled so delta_hat equals
  // this per unit of beta under harmonic-star weights, pinning the study
  // to the regime where the normal power curve should bite.
  double target_delta_per_beta = 10.0;
};

struct PowerRow {
  std::string weights;
  double beta = 0.0;
  double delta = 0.0;         // delta_hat under this weighting
  double power_theory = 0.0;  // 1 - Phi(z_star - delta)
  double power_mc = 0.0;
  double stderr_est = 0.0;
};

struct PowerStudyResult {
  std::vector<PowerRow> rows;  // grouped by beta, then weight scheme
  std::vector<double> x;       // the covariate actually used
  std::uint64_t replicates = 0;
};

// Draws assignments from the tilted law once per (beta, replicate) and
// scores every weight scheme against the same draw, so scheme
// comparisons are paired.
PowerStudyResult run_power_study(const PowerStudySpec& spec);

// --- JSON study specs ---------------------------------------------------

struct StudySpec {
  std::variant<SizeStudySpec, PowerStudySpec> spec;
};

// Parses {"type": "size" | "power", ...}; errors carry JSON-pointer-style
// locations ("/blocks/0/n: ...").
StudySpec parse_study_spec(const std::string& json_text);

}  // namespace randbal
