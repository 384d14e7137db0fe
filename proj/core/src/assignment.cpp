#include "randbal/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "randbal/common.hpp"

namespace randbal {
namespace {

// C(n, k) with overflow detection; returns false when the value does not
// fit in 64 bits.
bool binomial_u64(std::uint64_t n, std::uint64_t k, std::uint64_t& out) {
  if (k > n) {
    out = 0;
    return true;
  }
  if (k > n - k) k = n - k;
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;  // exact: the running product is C(n-k+i, i)
    if (c > static_cast<unsigned __int128>(UINT64_MAX)) return false;
  }
  out = static_cast<std::uint64_t>(c);
  return true;
}

long double log10_binomial(std::uint64_t n, std::uint64_t k) {
  return (std::lgammal(static_cast<long double>(n) + 1) -
          std::lgammal(static_cast<long double>(k) + 1) -
          std::lgammal(static_cast<long double>(n - k) + 1)) /
         std::log(10.0L);
}

// Advances comb (ascending positions into 0..n-1) to the next subset in
// lexicographic order; returns false after the last one.
bool next_combination(std::vector<std::uint32_t>& comb, std::uint32_t n) {
  const std::size_t k = comb.size();
  std::size_t i = k;
  while (i-- > 0) {
    if (comb[i] + 1 <= n - static_cast<std::uint32_t>(k - i)) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

void first_combination(std::vector<std::uint32_t>& comb, std::size_t k) {
  comb.resize(k);
  for (std::size_t i = 0; i < k; ++i) comb[i] = static_cast<std::uint32_t>(i);
}

void write_block(const Block& block, const std::vector<std::uint32_t>& comb,
                 std::vector<std::uint8_t>& z) {
  for (std::size_t c : block.clusters) z[c] = 0;
  for (std::uint32_t pos : comb) z[block.clusters[pos]] = 1;
}

// Partial Fisher-Yates: marks n_treated of the block's clusters, each
// subset equally likely.
void uniform_block(const Block& block, Rng& rng,
                   std::vector<std::uint32_t>& scratch,
                   std::vector<std::uint8_t>& z) {
  const std::size_t n = block.n;
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    scratch[i] = static_cast<std::uint32_t>(i);
  for (std::size_t c : block.clusters) z[c] = 0;
  for (std::size_t i = 0; i < block.n_treated; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(scratch[i], scratch[j]);
    z[block.clusters[scratch[i]]] = 1;
  }
}

}  // namespace

SpaceSize count_space(const Design& design) {
  SpaceSize s;
  s.count = 1;
  long double lg = 0;
  bool fits = true;
  for (const Block& b : design.blocks) {
    lg += log10_binomial(b.n, b.n_treated);
    std::uint64_t c = 0;
    if (!binomial_u64(b.n, b.n_treated, c)) {
      fits = false;
      continue;
    }
    if (fits) {
      unsigned __int128 prod =
          static_cast<unsigned __int128>(s.count) * c;
      if (prod > static_cast<unsigned __int128>(UINT64_MAX))
        fits = false;
      else
        s.count = static_cast<std::uint64_t>(prod);
    }
  }
  s.log10_count = static_cast<double>(lg);
  if (!fits) {
    s.huge = true;
    s.count = 0;
  }
  return s;
}

void for_each_assignment(
    const Design& design, std::uint64_t cap,
    const std::function<void(const std::vector<std::uint8_t>&)>& visit) {
  const SpaceSize space = count_space(design);
  if (space.huge || space.count > cap) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "randomization space has about 10^%.1f assignments, beyond "
                  "the enumeration cap of %llu; use Monte Carlo instead",
                  space.log10_count,
                  static_cast<unsigned long long>(cap));
    throw DesignError(buf);
  }

  const std::size_t n_blocks = design.blocks.size();
  std::vector<std::vector<std::uint32_t>> combs(n_blocks);
  std::vector<std::uint8_t> z(design.n_clusters(), 0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    first_combination(combs[b], design.blocks[b].n_treated);
    write_block(design.blocks[b], combs[b], z);
  }

  for (;;) {
    visit(z);
    // Odometer: advance the last block; on wrap, reset it and carry.
    std::size_t b = n_blocks;
    bool advanced = false;
    while (b-- > 0) {
      if (next_combination(combs[b],
                           static_cast<std::uint32_t>(design.blocks[b].n))) {
        write_block(design.blocks[b], combs[b], z);
        advanced = true;
        break;
      }
      first_combination(combs[b], design.blocks[b].n_treated);
      write_block(design.blocks[b], combs[b], z);
    }
    if (!advanced) return;
  }
}

void sample_uniform_into(const Design& design, Rng& rng,
                         std::vector<std::uint8_t>& z) {
  z.assign(design.n_clusters(), 0);
  std::vector<std::uint32_t> scratch;
  for (const Block& b : design.blocks) uniform_block(b, rng, scratch, z);
}

std::vector<std::uint8_t> sample_uniform(const Design& design, SeedSpec seed,
                                         std::uint64_t replicate) {
  Rng rng(seed, StreamDomain::study_replicate, replicate);
  std::vector<std::uint8_t> z;
  sample_uniform_into(design, rng, z);
  return z;
}

std::vector<double> psi_values(const CovariateMatrix& x,
                               const BiasModel& model) {
  if (x.names.empty() || model.covariate >= x.names.size())
    throw InputError("bias covariate index out of range");
  std::vector<double> psi(x.n_rows);
  for (std::size_t r = 0; r < x.n_rows; ++r) {
    const double v = x.at(r, model.covariate);
    const double p = model.psi ? model.psi(v) : model.beta * v;
    if (!std::isfinite(p))
      throw InputError("bias term is non-finite for covariate '" +
                       x.names[model.covariate] + "' at row " +
                       std::to_string(r + 1));
    psi[r] = p;
  }
  return psi;
}

BiasSampler::BiasSampler(const Design& design, std::vector<double> psi,
                         const BiasModel& model)
    : design_(&design),
      psi_(std::move(psi)),
      burnin_factor_(model.burnin_factor),
      exact_(design.blocks.size()) {
  if (psi_.size() != design.n_clusters())
    throw InputError("bias term count does not match cluster count");
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& blk = design.blocks[b];
    std::uint64_t n_subsets = 0;
    if (!binomial_u64(blk.n, blk.n_treated, n_subsets) ||
        n_subsets > model.exact_subset_limit)
      continue;  // Metropolis block

    ExactBlock& ex = exact_[b];
    ex.subsets.reserve(n_subsets * blk.n_treated);
    std::vector<double> logw;
    logw.reserve(n_subsets);
    std::vector<std::uint32_t> comb;
    first_combination(comb, blk.n_treated);
    do {
      double lw = 0;
      for (std::uint32_t pos : comb) {
        ex.subsets.push_back(pos);
        lw += psi_[blk.clusters[pos]];
      }
      logw.push_back(lw);
    } while (next_combination(comb, static_cast<std::uint32_t>(blk.n)));

    const double lw_max = *std::max_element(logw.begin(), logw.end());
    ex.cum.resize(logw.size());
    double total = 0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      total += std::exp(logw[i] - lw_max);
      ex.cum[i] = total;
    }
  }
}

void BiasSampler::draw(Rng& rng, std::vector<std::uint8_t>& z) const {
  const Design& design = *design_;
  z.assign(design.n_clusters(), 0);
  std::vector<std::uint32_t> scratch;
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& blk = design.blocks[b];
    const ExactBlock& ex = exact_[b];
    if (!ex.cum.empty()) {
      const double total = ex.cum.back();
      const double u = rng.uniform01() * total;
      const std::size_t idx = static_cast<std::size_t>(
          std::lower_bound(ex.cum.begin(), ex.cum.end(), u) - ex.cum.begin());
      const std::size_t at = std::min(idx, ex.cum.size() - 1);
      const std::uint32_t* subset = ex.subsets.data() + at * blk.n_treated;
      for (std::size_t i = 0; i < blk.n_treated; ++i)
        z[blk.clusters[subset[i]]] = 1;
      continue;
    }

    // Metropolis swap chain from a fresh uniform start.
    uniform_block(blk, rng, scratch, z);
    std::vector<std::uint32_t> treated, control;
    treated.reserve(blk.n_treated);
    control.reserve(blk.n - blk.n_treated);
    for (std::uint32_t pos = 0; pos < blk.n; ++pos) {
      if (z[blk.clusters[pos]])
        treated.push_back(pos);
      else
        control.push_back(pos);
    }
    const std::uint64_t proposals =
        burnin_factor_ * static_cast<std::uint64_t>(blk.n);
    for (std::uint64_t step = 0; step < proposals; ++step) {
      const std::size_t ti =
          static_cast<std::size_t>(rng.below(treated.size()));
      const std::size_t ci =
          static_cast<std::size_t>(rng.below(control.size()));
      const double delta = psi_[blk.clusters[control[ci]]] -
                           psi_[blk.clusters[treated[ti]]];
      if (delta >= 0 || rng.uniform01() < std::exp(delta))
        std::swap(treated[ti], control[ci]);
    }
    for (std::size_t c : blk.clusters) z[c] = 0;
    for (std::uint32_t pos : treated) z[blk.clusters[pos]] = 1;
  }
}

std::vector<std::uint8_t> sample_biased(const Design& design,
                                        const CovariateMatrix& x,
                                        const BiasModel& model, SeedSpec seed,
                                        std::uint64_t replicate) {
  BiasSampler sampler(design, psi_values(x, model), model);
  Rng rng(seed, StreamDomain::study_replicate, replicate);
  std::vector<std::uint8_t> z;
  sampler.draw(rng, z);
  return z;
}

void validate_assignment(const Design& design,
                         const std::vector<std::uint8_t>& z) {
  if (z.size() != design.n_clusters())
    throw InputError("assignment length does not match cluster count");
  for (const Block& b : design.blocks) {
    std::size_t t = 0;
    for (std::size_t c : b.clusters) {
      if (z[c] != 0 && z[c] != 1)
        throw InputError("assignment entries must be 0 or 1");
      t += z[c];
    }
    if (t != b.n_treated)
      throw InputError("block '" + b.block_id + "' has " + std::to_string(t) +
                       " treated clusters, expected " +
                       std::to_string(b.n_treated));
  }
}

}  // namespace randbal
