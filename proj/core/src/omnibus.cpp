#include "randbal/omnibus.hpp"

#include <cmath>
#include <limits>

#include "randbal/stats.hpp"

namespace randbal {

OmnibusContext make_omnibus_context(const Design& design,
                                    const CovariateMatrix& x,
                                    const Weights& w) {
  OmnibusContext ctx;
  ctx.cov = variance_d(design, x, w);
  PsdPinv pp = pseudo_inverse_psd(ctx.cov);
  ctx.pinv = std::move(pp.pinv);
  ctx.df = pp.rank;
  ctx.tolerance = pp.tolerance;
  ctx.lambda_max = pp.lambda_max;
  return ctx;
}

std::vector<double> d_vector(const Design& design, const CovariateMatrix& x,
                             const std::vector<std::uint8_t>& z,
                             const Weights& w) {
  DEvaluator ev(design, x, w);
  std::vector<double> d(ev.dims());
  ev.eval(z, d.data());
  return d;
}

double d2_of(const OmnibusContext& ctx, const std::vector<double>& d) {
  return quadratic_form(ctx.pinv, d);
}

OmnibusResult compute_d2(const OmnibusContext& ctx,
                         const std::vector<double>& d) {
  OmnibusResult r;
  r.d2 = d2_of(ctx, d);
  r.df = ctx.df;
  r.rank_tolerance = ctx.tolerance;
  if (ctx.df < 1) {
    r.degenerate = true;
    r.p_chi2 = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  r.p_chi2 = chi2_sf(std::max(r.d2, 0.0), r.df);
  return r;
}

OmnibusResult omnibus_test(const Design& design, const CovariateMatrix& x,
                           const std::vector<std::uint8_t>& z,
                           const Weights& w) {
  const OmnibusContext ctx = make_omnibus_context(design, x, w);
  return compute_d2(ctx, d_vector(design, x, z, w));
}

MidPResult d2_mid_p(const Design& design, const CovariateMatrix& x,
                    const std::vector<std::uint8_t>& z_obs, const Weights& w,
                    const OmnibusContext& ctx, const MidPOptions& opt) {
  return mid_p_batch(design, x, z_obs, w, opt, &ctx.pinv).quadratic;
}

}  // namespace randbal
