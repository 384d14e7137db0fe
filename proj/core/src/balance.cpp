#include "randbal/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "randbal/common.hpp"
#include "randbal/stats.hpp"

namespace randbal {
namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

void check_lengths(const Design& design, std::size_t x_len, std::size_t z_len,
                   const Weights& w) {
  if (x_len != design.n_clusters())
    throw InputError("covariate length does not match cluster count");
  if (z_len != design.n_clusters())
    throw InputError("assignment length does not match cluster count");
  if (w.per_block.size() != design.blocks.size())
    throw InputError("weight count does not match block count");
}

// Mean and (n-1)-denominator variance, two-pass.
std::pair<double, double> mean_var(const std::vector<double>& v) {
  const std::size_t n = v.size();
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, n > 1 ? ss / static_cast<double>(n - 1) : 0.0};
}

}  // namespace

std::vector<std::uint8_t> observed_assignment(const Design& design) {
  std::vector<std::uint8_t> z(design.n_clusters());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = design.z_observed[i] ? 1 : 0;
  return z;
}

double compute_d(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z, const Weights& w) {
  check_lengths(design, x.size(), z.size(), w);
  double d = 0;
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& blk = design.blocks[b];
    double treated = 0, control = 0;
    for (std::size_t c : blk.clusters) (z[c] ? treated : control) += x[c];
    const double nt = static_cast<double>(blk.n_treated);
    const double nc = static_cast<double>(blk.n - blk.n_treated);
    d += w.per_block[b] *
         (treated / (blk.m_bar * nt) - control / (blk.m_bar * nc));
  }
  return d;
}

double compute_dp(const Design& design, const std::vector<double>& x,
                  const std::vector<std::uint8_t>& z, const Weights& w) {
  check_lengths(design, x.size(), z.size(), w);
  double d = 0;
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& blk = design.blocks[b];
    double treated = 0, control = 0, m_treated = 0, m_control = 0;
    for (std::size_t c : blk.clusters) {
      if (z[c]) {
        treated += x[c];
        m_treated += design.m[c];
      } else {
        control += x[c];
        m_control += design.m[c];
      }
    }
    d += w.per_block[b] * (treated / m_treated - control / m_control);
  }
  return d;
}

Matrix variance_d(const Design& design, const CovariateMatrix& x,
                  const Weights& w) {
  if (x.n_rows != design.n_clusters())
    throw InputError("covariate rows do not match cluster count");
  if (w.per_block.size() != design.blocks.size())
    throw InputError("weight count does not match block count");
  const std::size_t k = x.cols();
  Matrix cov(k, k);
  std::vector<double> mean(k);
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& blk = design.blocks[b];
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t c : blk.clusters)
      for (std::size_t i = 0; i < k; ++i) mean[i] += x.at(c, i);
    for (std::size_t i = 0; i < k; ++i)
      mean[i] /= static_cast<double>(blk.n);

    const double scale = w.per_block[b] * w.per_block[b] /
                         (blk.h * blk.m_bar * blk.m_bar *
                          static_cast<double>(blk.n - 1));
    for (std::size_t c : blk.clusters) {
      for (std::size_t i = 0; i < k; ++i) {
        const double di = x.at(c, i) - mean[i];
        for (std::size_t j = i; j < k; ++j)
          cov(i, j) += scale * di * (x.at(c, j) - mean[j]);
      }
    }
  }
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < i; ++j) cov(i, j) = cov(j, i);
  return cov;
}

double variance_of_d(const Design& design, const std::vector<double>& x,
                     const Weights& w) {
  CovariateMatrix one;
  one.names = {"x"};
  one.n_rows = x.size();
  one.values = x;
  return variance_d(design, one, w)(0, 0);
}

ZP z_and_normal_p(double d, double variance, bool one_sided) {
  if (!(variance > 0) || !std::isfinite(d) || !std::isfinite(variance))
    return {nan_value, nan_value, true};
  const double z = d / std::sqrt(variance);
  return {z, one_sided ? normal_sf(z) : two_sided_normal_p(z), false};
}

double d_noclus(const Design& design, const std::vector<double>& x,
                const std::vector<std::uint8_t>& z) {
  if (x.size() != design.n_clusters() || z.size() != design.n_clusters())
    throw InputError("covariate or assignment length does not match design");
  double num = 0, denom = 0;
  for (const Block& blk : design.blocks) {
    double treated = 0, total = 0;
    for (std::size_t c : blk.clusters) {
      total += x[c];
      if (z[c]) treated += x[c];
    }
    num += treated - static_cast<double>(blk.n_treated) * total /
                         static_cast<double>(blk.n);
    denom += blk.h;
  }
  return num / denom;
}

StdDiff std_diff(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z) {
  std::vector<double> treated, control;
  for (std::size_t c = 0; c < design.n_clusters(); ++c)
    (z[c] ? treated : control).push_back(x[c]);
  if (treated.size() < 2 || control.size() < 2) return {nan_value, true};
  const auto [mt, vt] = mean_var(treated);
  const auto [mc, vc] = mean_var(control);
  (void)mt;
  (void)mc;
  const double df =
      static_cast<double>(treated.size() + control.size() - 2);
  const double pooled = (static_cast<double>(treated.size() - 1) * vt +
                         static_cast<double>(control.size() - 1) * vc) /
                        df;
  if (!(pooled > 0)) return {nan_value, true};
  return {d_noclus(design, x, z) / std::sqrt(pooled), false};
}

DEvaluator::DEvaluator(const Design& design, const CovariateMatrix& x,
                       const Weights& w)
    : x_(&x), k_(x.cols()), cluster_block_(design.block_index) {
  if (x.n_rows != design.n_clusters())
    throw InputError("covariate rows do not match cluster count");
  if (w.per_block.size() != design.blocks.size())
    throw InputError("weight count does not match block count");

  const std::size_t n_blocks = design.blocks.size();
  treated_coef_.resize(n_blocks);
  constant_.assign(k_, 0.0);
  std::vector<double> block_total(k_);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const Block& blk = design.blocks[b];
    const double nt = static_cast<double>(blk.n_treated);
    const double nc = static_cast<double>(blk.n - blk.n_treated);
    const double treated_side = w.per_block[b] / (blk.m_bar * nt);
    const double control_side = w.per_block[b] / (blk.m_bar * nc);
    treated_coef_[b] = treated_side + control_side;

    std::fill(block_total.begin(), block_total.end(), 0.0);
    for (std::size_t c : blk.clusters)
      for (std::size_t i = 0; i < k_; ++i) block_total[i] += x.at(c, i);
    for (std::size_t i = 0; i < k_; ++i)
      constant_[i] -= control_side * block_total[i];
  }
}

void DEvaluator::eval(const std::vector<std::uint8_t>& z, double* out) {
  std::copy(constant_.begin(), constant_.end(), out);
  const double* row = x_->values.data();
  for (std::size_t c = 0; c < cluster_block_.size(); ++c, row += k_) {
    if (!z[c]) continue;
    const double coef = treated_coef_[cluster_block_[c]];
    for (std::size_t i = 0; i < k_; ++i) out[i] += coef * row[i];
  }
}

namespace {

struct Tally {
  std::vector<std::uint64_t> greater, tied;
  std::uint64_t quad_greater = 0, quad_tied = 0;

  explicit Tally(std::size_t k) : greater(k, 0), tied(k, 0) {}

  void add(const Tally& o) {
    for (std::size_t i = 0; i < greater.size(); ++i) {
      greater[i] += o.greater[i];
      tied[i] += o.tied[i];
    }
    quad_greater += o.quad_greater;
    quad_tied += o.quad_tied;
  }
};

struct Reference {
  std::vector<double> abs_d_obs, tol;
  double quad_obs = 0, quad_tol = 0;
};

void score(const Reference& ref, const std::vector<double>& d, double quad,
           bool has_quad, Tally& t) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double a = std::fabs(d[i]);
    if (a > ref.abs_d_obs[i] + ref.tol[i])
      ++t.greater[i];
    else if (std::fabs(a - ref.abs_d_obs[i]) <= ref.tol[i])
      ++t.tied[i];
  }
  if (has_quad) {
    if (quad > ref.quad_obs + ref.quad_tol)
      ++t.quad_greater;
    else if (std::fabs(quad - ref.quad_obs) <= ref.quad_tol)
      ++t.quad_tied;
  }
}

MidPResult finish(std::uint64_t greater, std::uint64_t tied,
                  std::uint64_t total, bool exact) {
  MidPResult r;
  r.value = (static_cast<double>(greater) + 0.5 * static_cast<double>(tied)) /
            static_cast<double>(total);
  r.stderr_est =
      exact ? 0.0
            : std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(total));
  r.replicates = total;
  r.exact = exact;
  return r;
}

}  // namespace

BatchMidP mid_p_batch(const Design& design, const CovariateMatrix& x,
                      const std::vector<std::uint8_t>& z_obs, const Weights& w,
                      const MidPOptions& opt, const Matrix* quad_kernel) {
  const std::size_t k = x.cols();
  DEvaluator ev(design, x, w);
  if (z_obs.size() != design.n_clusters())
    throw InputError("assignment length does not match cluster count");

  std::vector<double> d_obs(k);
  ev.eval(z_obs, d_obs.data());

  Reference ref;
  ref.abs_d_obs.resize(k);
  ref.tol.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double scale = 0;
    for (std::size_t r = 0; r < x.n_rows; ++r)
      scale = std::max(scale, std::fabs(x.at(r, i)));
    ref.abs_d_obs[i] = std::fabs(d_obs[i]);
    ref.tol[i] = 1e-9 * ref.abs_d_obs[i] + 1e-12 * scale;
  }
  const bool has_quad = quad_kernel != nullptr;
  if (has_quad) {
    ref.quad_obs = quadratic_form(*quad_kernel, d_obs);
    ref.quad_tol = 1e-9 * std::fabs(ref.quad_obs) + 1e-12;
  }

  Tally total_tally(k);
  std::uint64_t total = 0;
  bool exact = false;

  if (opt.mode == MidPMode::exact) {
    exact = true;
    std::vector<double> d(k);
    for_each_assignment(design, opt.exact_cap,
                        [&](const std::vector<std::uint8_t>& z) {
                          ev.eval(z, d.data());
                          const double q =
                              has_quad ? quadratic_form(*quad_kernel, d) : 0.0;
                          score(ref, d, q, has_quad, total_tally);
                          ++total;
                        });
  } else {
    if (opt.replicates < 100)
      throw InputError("Monte Carlo mid-p needs at least 100 replicates");
    total = opt.replicates;
    const unsigned workers = worker_count(total);
    std::vector<Tally> per_worker(workers, Tally(k));
    parallel_chunks(total, [&](unsigned worker, std::size_t begin,
                               std::size_t end) {
      DEvaluator local(ev);
      std::vector<double> d(k);
      std::vector<std::uint8_t> z;
      Tally& t = per_worker[worker];
      for (std::size_t r = begin; r < end; ++r) {
        Rng rng(opt.seed, StreamDomain::mc_midp, r);
        sample_uniform_into(design, rng, z);
        local.eval(z, d.data());
        const double q = has_quad ? quadratic_form(*quad_kernel, d) : 0.0;
        score(ref, d, q, has_quad, t);
      }
    });
    for (const Tally& t : per_worker) total_tally.add(t);
  }

  BatchMidP out;
  out.covariate.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.covariate.push_back(
        finish(total_tally.greater[i], total_tally.tied[i], total, exact));
  if (has_quad) {
    out.quadratic =
        finish(total_tally.quad_greater, total_tally.quad_tied, total, exact);
    out.has_quadratic = true;
  }
  return out;
}

MidPResult mid_p(const Design& design, const std::vector<double>& x,
                 const std::vector<std::uint8_t>& z_obs, const Weights& w,
                 const MidPOptions& opt) {
  CovariateMatrix one;
  one.names = {"x"};
  one.n_rows = x.size();
  one.values = x;
  return mid_p_batch(design, one, z_obs, w, opt).covariate[0];
}

}  // namespace randbal
