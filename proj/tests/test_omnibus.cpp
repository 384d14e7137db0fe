#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "design_oracles.hpp"
#include "oracles.hpp"
#include "randbal/data_model.hpp"
#include "randbal/omnibus.hpp"
#include "randbal/stats.hpp"

using randbal::ClusterRecord;
using randbal::CovariateMatrix;
using randbal::Design;
using randbal::MidPMode;
using randbal::MidPOptions;
using randbal::Rng;
using randbal::StreamDomain;
using randbal::WeightKind;
using randbal::Weights;

namespace {

struct Built {
  Design design;
  CovariateMatrix x;
  std::vector<std::uint8_t> z;
  Weights w;
};

Built build(const std::vector<ClusterRecord>& clusters,
            std::vector<std::string> names) {
  auto bd = randbal::build_design(clusters);
  auto all = randbal::matrix_from_clusters(clusters, std::move(names));
  Built b{std::move(bd.design), randbal::select_rows(all, bd.kept_rows), {}, {}};
  b.z = randbal::observed_assignment(b.design);
  b.w = randbal::block_weights(b.design, WeightKind::harmonic_star);
  return b;
}

ClusterRecord cluster(std::string id, std::string block, int z, double m,
                      std::vector<double> x) {
  ClusterRecord c;
  c.cluster_id = std::move(id);
  c.block_id = std::move(block);
  c.z = z;
  c.m = m;
  c.x = std::move(x);
  return c;
}

Built quartet(std::vector<std::vector<double>> covs) {
  std::vector<ClusterRecord> cs;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < covs[0].size(); ++j)
    names.push_back("x" + std::to_string(j + 1));
  for (int i = 0; i < 4; ++i)
    cs.push_back(cluster("c" + std::to_string(i + 1), "b1", i < 2 ? 1 : 0, 1,
                         covs[static_cast<std::size_t>(i)]));
  return build(cs, names);
}

Built random_built(Rng& rng, std::size_t k) {
  const auto clusters = oracle::random_clusters(rng, 3, 12, k);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < k; ++j)
    names.push_back("x" + std::to_string(j + 1));
  return build(clusters, names);
}

}  // namespace

TEST_CASE("one covariate: d2 is the squared z and p matches the normal") {
  const Built b = quartet({{1}, {2}, {3}, {4}});
  const auto ctx = randbal::make_omnibus_context(b.design, b.x, b.w);
  CHECK(ctx.df == 1);
  CHECK(ctx.cov(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(ctx.pinv(0, 0) == doctest::Approx(0.6).epsilon(1e-12));

  const auto d = randbal::d_vector(b.design, b.x, b.z, b.w);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == -2.0);

  const auto r = randbal::compute_d2(ctx, d);
  CHECK(r.d2 == doctest::Approx(2.4).epsilon(1e-14));
  CHECK(r.df == 1);
  CHECK_FALSE(r.degenerate);
  CHECK(r.p_chi2 == doctest::Approx(0.121335250358).epsilon(1e-9));

  // Chi-square on one degree of freedom is the square of a normal.
  const auto zp = randbal::z_and_normal_p(d[0], ctx.cov(0, 0));
  CHECK(r.p_chi2 == doctest::Approx(zp.p).epsilon(1e-12));
}

TEST_CASE("a duplicated covariate changes neither rank nor d2") {
  const Built one = quartet({{1}, {2}, {3}, {4}});
  const Built two = quartet({{1, 1}, {2, 2}, {3, 3}, {4, 4}});

  const auto r1 = randbal::omnibus_test(one.design, one.x, one.z, one.w);
  const auto r2 = randbal::omnibus_test(two.design, two.x, two.z, two.w);
  CHECK(r2.df == 1);
  CHECK(r2.d2 == doctest::Approx(r1.d2).epsilon(1e-10));
  CHECK(r2.p_chi2 == doctest::Approx(r1.p_chi2).epsilon(1e-10));
}

TEST_CASE("d2 is invariant under invertible covariate recombination") {
  Rng rng({601}, StreamDomain::generic, 0);
  for (int rep = 0; rep < 8; ++rep) {
    const Built b = random_built(rng, 2);
    const auto base = randbal::omnibus_test(b.design, b.x, b.z, b.w);

    // y1 = 2 x1 + x2, y2 = 3 x2 - x1, plus a shift on y1; shifts cancel
    // inside each block's contrast.
    CovariateMatrix y = b.x;
    for (std::size_t r = 0; r < y.n_rows; ++r) {
      const double x1 = b.x.at(r, 0), x2 = b.x.at(r, 1);
      y.at(r, 0) = 2 * x1 + x2;
      y.at(r, 1) = 3 * x2 - x1;
    }
    const auto mixed = randbal::omnibus_test(b.design, y, b.z, b.w);
    CHECK(mixed.df == base.df);
    CHECK(mixed.d2 == doctest::Approx(base.d2).epsilon(1e-8));
  }
}

TEST_CASE("an independent covariate raises the rank by one") {
  Rng rng({602}, StreamDomain::generic, 0);
  const Built two = random_built(rng, 2);
  const auto r2 = randbal::omnibus_test(two.design, two.x, two.z, two.w);
  CHECK(r2.df == 2);

  CovariateMatrix wider = two.x;
  wider.names.push_back("x3");
  CovariateMatrix fresh;
  fresh.names = wider.names;
  fresh.n_rows = wider.n_rows;
  for (std::size_t r = 0; r < wider.n_rows; ++r) {
    fresh.values.push_back(wider.at(r, 0));
    fresh.values.push_back(wider.at(r, 1));
    fresh.values.push_back(rng.normal());
  }
  const auto r3 =
      randbal::omnibus_test(two.design, fresh, two.z, two.w);
  CHECK(r3.df == 3);
  CHECK(r3.d2 >= -1e-12);
}

TEST_CASE("d2 agrees with directly solving C y = d") {
  Rng rng({603}, StreamDomain::generic, 0);
  for (int rep = 0; rep < 6; ++rep) {
    const Built b = random_built(rng, 2);
    const auto ctx = randbal::make_omnibus_context(b.design, b.x, b.w);
    if (ctx.df < 2) continue;  // want the nonsingular case here
    const auto d = randbal::d_vector(b.design, b.x, b.z, b.w);

    std::vector<std::vector<double>> c_rows(2, std::vector<double>(2));
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) c_rows[i][j] = ctx.cov(i, j);
    const auto y = oracle::least_squares(c_rows, d);
    const double direct = d[0] * y[0] + d[1] * y[1];
    CHECK(randbal::d2_of(ctx, d) == doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("exact d2 mid-p on the worked example") {
  const Built b = quartet({{1}, {2}, {3}, {4}});
  const auto ctx = randbal::make_omnibus_context(b.design, b.x, b.w);
  MidPOptions opt;
  opt.mode = MidPMode::exact;
  const auto r = randbal::d2_mid_p(b.design, b.x, b.z, b.w, ctx, opt);
  CHECK(r.value == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(r.exact);
  CHECK(r.replicates == 6);
}

TEST_CASE("Monte Carlo d2 mid-p tracks the enumerated value") {
  Rng rng({604}, StreamDomain::generic, 0);
  const Built b = random_built(rng, 2);
  const auto ctx = randbal::make_omnibus_context(b.design, b.x, b.w);

  MidPOptions exact;
  exact.mode = MidPMode::exact;
  const auto truth = randbal::d2_mid_p(b.design, b.x, b.z, b.w, ctx, exact);

  MidPOptions mc;
  mc.mode = MidPMode::monte_carlo;
  mc.replicates = 200'000;
  mc.seed = {424242};
  const auto est = randbal::d2_mid_p(b.design, b.x, b.z, b.w, ctx, mc);
  CHECK(std::fabs(est.value - truth.value) <= 3 * est.stderr_est);
}

TEST_CASE("constant covariates: zero rank, flagged, mid-p one half") {
  const Built b = quartet({{2}, {2}, {2}, {2}});
  const auto ctx = randbal::make_omnibus_context(b.design, b.x, b.w);
  CHECK(ctx.df == 0);

  const auto r =
      randbal::compute_d2(ctx, randbal::d_vector(b.design, b.x, b.z, b.w));
  CHECK(r.degenerate);
  CHECK(std::isnan(r.p_chi2));

  MidPOptions opt;
  opt.mode = MidPMode::exact;
  CHECK(randbal::d2_mid_p(b.design, b.x, b.z, b.w, ctx, opt).value == 0.5);
}

TEST_CASE("two-covariate chi-square reading matches quadrature") {
  Rng rng({605}, StreamDomain::generic, 0);
  const Built b = random_built(rng, 2);
  const auto r = randbal::omnibus_test(b.design, b.x, b.z, b.w);
  if (r.df == 2)
    CHECK(r.p_chi2 == doctest::Approx(oracle::chi2_sf(r.d2, 2)).epsilon(1e-9));
}
