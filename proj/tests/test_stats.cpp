#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "randbal/common.hpp"
#include "randbal/stats.hpp"

using randbal::chi2_sf;
using randbal::normal_cdf;
using randbal::normal_sf;
using randbal::two_sided_normal_p;

TEST_CASE("normal cdf matches the quadrature oracle") {
  for (double z = -6.0; z <= 6.0 + 1e-12; z += 0.25) {
    const double want = oracle::normal_cdf(z);
    CHECK(std::fabs(normal_cdf(z) - want) <= 1e-12);
  }
}

TEST_CASE("normal cdf basics") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(two_sided_normal_p(0.0) == 1.0);
  for (double z : {0.1, 0.7, 1.5, 2.3, 4.0}) {
    CHECK(std::fabs(normal_cdf(-z) - (1.0 - normal_cdf(z))) <= 1e-15);
    CHECK(normal_cdf(z) > normal_cdf(z - 0.05));
    CHECK(std::fabs(normal_cdf(z) + normal_sf(z) - 1.0) <= 1e-15);
  }
  CHECK(normal_sf(10.0) > 0.0);
  CHECK(normal_sf(10.0) < 1e-20);
}

TEST_CASE("two-sided normal p at pinned reference points") {
  // Reference values computed to 40 digits with an arbitrary-precision
  // evaluation of 2(1 - Phi(z)).
  CHECK(std::fabs(two_sided_normal_p(1.186) - 0.235622299524) <= 1e-9);
  CHECK(std::fabs(two_sided_normal_p(0.226) - 0.821201420328) <= 1e-9);
  CHECK(std::fabs(two_sided_normal_p(1.228) - 0.219446967978) <= 1e-9);
  CHECK(std::fabs(two_sided_normal_p(-0.853) - 0.393659304204) <= 1e-9);
}

TEST_CASE("chi-square upper tail matches the quadrature oracle") {
  const int dfs[] = {1, 2, 3, 7, 10, 38, 100, 363};
  const double xs[] = {0.5, 1.0, 2.4, 5.0, 10.0, 37.0, 90.0, 250.0, 360.6, 500.0};
  for (int df : dfs) {
    for (double x : xs) {
      const double want = oracle::chi2_sf(x, df);
      CHECK(std::fabs(chi2_sf(x, df) - want) <= 1e-10);
    }
  }
}

TEST_CASE("chi-square upper tail pinned values") {
  CHECK(chi2_sf(0.0, 1) == 1.0);
  CHECK(chi2_sf(0.0, 363) == 1.0);
  CHECK(std::fabs(chi2_sf(3.841, 1) - 0.050013683764) <= 1e-9);
  CHECK(std::fabs(chi2_sf(2.4, 1) - 0.121335250358) <= 1e-9);
  CHECK(std::fabs(chi2_sf(360.6, 363) - 0.52571799596) <= 1e-8);
  CHECK(chi2_sf(360.6, 363) > 0.52);
  CHECK(chi2_sf(360.6, 363) < 0.53);
}

TEST_CASE("chi-square(1) upper tail agrees with the squared-normal identity") {
  for (double z : {0.3, 0.8, 1.186, 1.645, 1.96, 2.5, 3.0}) {
    CHECK(std::fabs(chi2_sf(z * z, 1) - two_sided_normal_p(z)) <= 1e-12);
  }
}

TEST_CASE("chi-square rejects invalid arguments") {
  CHECK_THROWS_AS(chi2_sf(1.0, 0), randbal::InputError);
  CHECK_THROWS_AS(chi2_sf(1.0, -3), randbal::InputError);
  CHECK_THROWS_AS(chi2_sf(-0.5, 2), randbal::InputError);
}
