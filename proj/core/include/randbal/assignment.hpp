#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "randbal/rng.hpp"
#include "randbal/types.hpp"

namespace randbal {

// Size of the randomization space A = prod over blocks of C(n_b, n_tb).
struct SpaceSize {
  bool huge = false;         // product overflows 64 bits
  std::uint64_t count = 0;   // exact count when !huge
  double log10_count = 0.0;  // defined either way
};
SpaceSize count_space(const Design& design);

inline constexpr std::uint64_t default_enumeration_cap = 10'000'000;

// Visits every assignment in A exactly once, in a deterministic order:
// per-block treated subsets in lexicographic order, with later blocks
// advancing fastest. Throws DesignError when #A exceeds cap, advising
// Monte Carlo instead.
void for_each_assignment(
    const Design& design, std::uint64_t cap,
    const std::function<void(const std::vector<std::uint8_t>&)>& visit);

// Uniform draw from A: within each block every size-n_tb subset of
// clusters is equally likely, independently across blocks. The result is
// a pure function of (design, seed, replicate).
std::vector<std::uint8_t> sample_uniform(const Design& design, SeedSpec seed,
                                         std::uint64_t replicate);

// Same draw fed from a caller-managed stream (one stream per replicate in
// simulation loops).
void sample_uniform_into(const Design& design, Rng& rng,
                         std::vector<std::uint8_t>& z);

// Biased assignment law, conditioned per block on the treated count:
// P(z_b | count = n_tb) proportional to exp(sum_i z_bi * psi(x_i)).
// beta = 0 with the default psi(x) = beta*x reduces exactly to the
// uniform law.
struct BiasModel {
  double beta = 0.0;
  std::size_t covariate = 0;  // column index fed to psi
  // Per-cluster bias from the covariate value; empty means beta * x.
  std::function<double(double)> psi;
  // Blocks with C(n_b, n_tb) at or below this limit are sampled exactly by
  // enumerating subsets; larger blocks run a Metropolis swap chain.
  std::uint64_t exact_subset_limit = 10'000;
  // Swap-chain burn-in is burnin_factor * n_b proposals, each chain
  // starting from a fresh uniform draw so replicates stay independent.
  std::uint64_t burnin_factor = 50;
};

// psi applied to the model's covariate column; throws InputError on
// non-finite values.
std::vector<double> psi_values(const CovariateMatrix& x, const BiasModel& model);

// Prepared per-design sampler: builds exact subset tables once for small
// blocks, so repeated draws are cheap. Pure per draw.
class BiasSampler {
 public:
  BiasSampler(const Design& design, std::vector<double> psi,
              const BiasModel& model);
  void draw(Rng& rng, std::vector<std::uint8_t>& z) const;
  bool block_uses_exact(std::size_t b) const { return !exact_[b].cum.empty(); }

 private:
  struct ExactBlock {
    std::vector<std::uint32_t> subsets;  // flattened, n_treated per subset
    std::vector<double> cum;             // cumulative unnormalized weights
  };

  const Design* design_;
  std::vector<double> psi_;
  std::uint64_t burnin_factor_;
  std::vector<ExactBlock> exact_;  // empty table = Metropolis block
};

std::vector<std::uint8_t> sample_biased(const Design& design,
                                        const CovariateMatrix& x,
                                        const BiasModel& model, SeedSpec seed,
                                        std::uint64_t replicate);

// Checks per-block treated counts; throws InputError on violation.
void validate_assignment(const Design& design,
                         const std::vector<std::uint8_t>& z);

}  // namespace randbal
