#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "design_oracles.hpp"
#include "doctest.h"
#include "randbal/balance.hpp"
#include "randbal/common.hpp"
#include "randbal/data_model.hpp"
#include "randbal/experiments.hpp"
#include "randbal/stats.hpp"
#include "randbal/weights.hpp"

using namespace randbal;

namespace {

struct Built {
  Design design;
  CovariateMatrix x;
};

Built build(const std::vector<ClusterRecord>& clusters,
            std::vector<std::string> names) {
  DesignBuild db = build_design(clusters);
  Built out;
  out.x = select_rows(matrix_from_clusters(clusters, names), db.kept_rows);
  out.design = std::move(db.design);
  return out;
}

ClusterRecord rec(const std::string& id, const std::string& block, int z,
                  double m, std::vector<double> x) {
  ClusterRecord r;
  r.cluster_id = id;
  r.block_id = block;
  r.z = z;
  r.m = m;
  r.x = std::move(x);
  return r;
}

std::vector<ClusterRecord> single_block_21(Rng& rng) {
  std::vector<ClusterRecord> out;
  for (int i = 0; i < 21; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "c%02d", i);
    out.push_back(rec(id, "all", i < 14 ? 1 : 0, 1.0 + rng.below(7),
                      {rng.normal(), std::exp(0.8 * rng.normal())}));
  }
  return out;
}

void expect_spec_error(const std::string& text, const std::string& needle) {
  try {
    parse_study_spec(text);
    FAIL_CHECK("expected InputError for spec: " << text);
  } catch (const InputError& e) {
    const std::string what = e.what();
    CHECK_MESSAGE(what.find(needle) != std::string::npos,
                  "message '" << what << "' lacks '" << needle << "'");
  }
}

}  // namespace

TEST_CASE("unstratified designs score 1/sqrt(h) for any covariate") {
  Rng rng(SeedSpec{101}, StreamDomain::generic, 0);
  const auto clusters = single_block_21(rng);
  const Built b = build(clusters, {"a", "b"});
  const double expected = std::sqrt(3.0 / 14.0);
  CHECK(expected == doctest::Approx(0.46291004988627573).epsilon(1e-15));
  for (std::size_t j = 0; j < 2; ++j) {
    const double ratio = balance_ratio(b.design, b.x.column(j));
    CHECK(ratio == doctest::Approx(expected).epsilon(1e-12));
  }

  // Same identity on a different split of the same clusters.
  auto fewer = clusters;
  for (std::size_t i = 0; i < fewer.size(); ++i) fewer[i].z = i < 5 ? 1 : 0;
  const Built b5 = build(fewer, {"a", "b"});
  const double h5 = 5.0 * (1.0 - 5.0 / 21.0);
  CHECK(balance_ratio(b5.design, b5.x.column(0)) ==
        doctest::Approx(1.0 / std::sqrt(h5)).epsilon(1e-12));
}

TEST_CASE("a stratification aligned with the covariate scores zero") {
  std::vector<ClusterRecord> clusters;
  for (int i = 0; i < 4; ++i)
    clusters.push_back(rec("c" + std::to_string(i), "g1", i < 2, 2.0, {10.0}));
  for (int i = 4; i < 9; ++i)
    clusters.push_back(rec("c" + std::to_string(i), "g2", i < 6, 3.0, {-4.0}));
  const Built b = build(clusters, {"x"});
  CHECK(balance_ratio(b.design, b.x.column(0)) == 0.0);
}

TEST_CASE("ratio numerator matches the enumerated spread of d") {
  Rng rng(SeedSpec{202}, StreamDomain::generic, 1);
  std::vector<ClusterRecord> clusters;
  const std::size_t ns[3] = {6, 9, 6};
  const std::size_t ts[3] = {4, 6, 4};
  std::size_t cid = 0;
  for (std::size_t g = 0; g < 3; ++g)
    for (std::size_t i = 0; i < ns[g]; ++i) {
      char id[8];
      std::snprintf(id, sizeof id, "c%02zu", cid++);
      clusters.push_back(rec(id, "g" + std::to_string(g), i < ts[g],
                             1.0 + rng.below(4), {rng.normal() * 3.0}));
    }
  const Built b = build(clusters, {"x"});
  const Weights w = block_weights(b.design, WeightKind::harmonic_star);
  const auto moments = oracle::enumerate_d_moments(b.design, b.x, w.per_block);
  CHECK(moments.count == 15 * 84 * 15);

  std::vector<double> per_unit(b.design.n_clusters());
  double mean = 0.0;
  for (std::size_t i = 0; i < per_unit.size(); ++i) {
    per_unit[i] = b.x.at(i, 0) /
                  b.design.blocks[b.design.block_index[i]].m_bar;
    mean += per_unit[i];
  }
  mean /= static_cast<double>(per_unit.size());
  double ss = 0.0;
  for (double v : per_unit) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(per_unit.size() - 1));

  const double ratio = balance_ratio(b.design, b.x.column(0));
  CHECK(ratio ==
        doctest::Approx(std::sqrt(moments.cov[0][0]) / sd).epsilon(1e-10));
}

TEST_CASE("balance ratio rejects flat covariates and bad lengths") {
  Rng rng(SeedSpec{7}, StreamDomain::generic, 2);
  const Built b = build(single_block_21(rng), {"a", "b"});
  CHECK_THROWS_AS(balance_ratio(b.design, std::vector<double>(21, 3.5)),
                  DesignError);
  CHECK_THROWS_AS(balance_ratio(b.design, std::vector<double>(20, 1.0)),
                  InputError);
}

TEST_CASE("treated totals are apportioned by block size and repaired") {
  using V = std::vector<std::size_t>;
  CHECK(apportion_treated({21}, 14) == V{14});
  CHECK(apportion_treated({6, 9, 6}, 14) == V{4, 6, 4});
  CHECK(apportion_treated({2, 10}, 9) == V{1, 8});
  CHECK(apportion_treated({2, 2, 2}, 3) == V{1, 1, 1});
  CHECK(apportion_treated({5, 3}, 6) == V{4, 2});
  CHECK(apportion_treated({1, 4}, 2) == V{0, 2});  // singleton sits out

  CHECK_THROWS_AS(apportion_treated({2, 2}, 4), DesignError);
  CHECK_THROWS_AS(apportion_treated({3}, 0), DesignError);
  CHECK_THROWS_AS(apportion_treated({1, 1}, 1), DesignError);
}

TEST_CASE("identical candidates produce identical rows") {
  Rng rng(SeedSpec{33}, StreamDomain::generic, 3);
  const auto clusters = single_block_21(rng);
  std::vector<std::string> tri(21), flat(21, "all");
  for (std::size_t i = 0; i < 21; ++i) tri[i] = "g" + std::to_string(i % 3);

  const std::vector<Candidate> candidates = {
      {"by-thirds", tri}, {"by-thirds-again", tri}, {"none", flat}};
  const CompareResult table =
      compare_stratifications(clusters, {"a", "b"}, candidates, 14);

  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].ratios == table.rows[1].ratios);

  // The unstratified row is the same known constant in every column.
  const double expected = std::sqrt(3.0 / 14.0);
  for (double r : table.rows[2].ratios)
    CHECK(r == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("blocking on the covariate's driver dominates every column") {
  std::vector<ClusterRecord> clusters;
  Rng rng(SeedSpec{44}, StreamDomain::generic, 4);
  const double sizes[3] = {1.0, 5.0, 20.0};
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 4; ++i) {
      const double m = sizes[g];
      clusters.push_back(rec("c" + std::to_string(g * 4 + i), "obs",
                             i < 2, m,
                             {m + 0.01 * rng.normal(),
                              2.0 * m + 0.05 * rng.normal()}));
    }
  std::vector<std::string> by_size(12), flat(12, "all");
  for (int i = 0; i < 12; ++i) by_size[i] = "s" + std::to_string(i / 4);

  const CompareResult table = compare_stratifications(
      clusters, {"a", "b"}, {{"size", by_size}, {"none", flat}}, 6);
  for (std::size_t j = 0; j < 2; ++j)
    CHECK(table.rows[0].ratios[j] < table.rows[1].ratios[j]);
}

TEST_CASE("compare_stratifications flags unusable blocks") {
  Rng rng(SeedSpec{55}, StreamDomain::generic, 5);
  const auto clusters = single_block_21(rng);
  std::vector<std::string> labels(21, "big");
  labels[20] = "lonely";
  const CompareResult table =
      compare_stratifications(clusters, {"a", "b"}, {{"cand", labels}}, 10);
  REQUIRE(table.rows.size() == 1);
  REQUIRE_FALSE(table.rows[0].warnings.empty());
  CHECK(table.rows[0].warnings[0].find("lonely") != std::string::npos);
  CHECK(table.rows[0].ratios[0] > 0.0);

  CHECK_THROWS_AS(
      compare_stratifications(clusters, {"a", "b"}, {{"cand", labels}}, 25),
      DesignError);
  CHECK_THROWS_AS(compare_stratifications(
                      clusters, {"a", "b"}, {{"short", {"g1", "g2"}}}, 10),
                  InputError);
}

TEST_CASE("delta_hat is scale invariant and maximized by harmonic weights") {
  std::vector<ClusterRecord> clusters;
  Rng rng(SeedSpec{66}, StreamDomain::generic, 6);
  const std::size_t ns[6] = {2, 2, 2, 5, 5, 4};
  const std::size_t ts[6] = {1, 1, 1, 2, 2, 3};
  std::size_t cid = 0;
  for (std::size_t g = 0; g < 6; ++g)
    for (std::size_t i = 0; i < ns[g]; ++i)
      clusters.push_back(rec("c" + std::to_string(cid++),
                             "g" + std::to_string(g), i < ts[g],
                             1.0 + rng.below(3), {rng.normal()}));
  const Built b = build(clusters, {"x"});
  const std::vector<double> x = b.x.column(0);

  const Weights w_star = block_weights(b.design, WeightKind::harmonic_star);
  const double base = delta_hat(b.design, x, w_star, 0.7);
  REQUIRE(base > 0.0);

  CHECK(delta_hat(b.design, x, w_star, 0.0) == 0.0);
  CHECK(delta_hat(b.design, x, w_star, 1.4) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));

  std::vector<double> scaled = x, shifted = x;
  for (double& v : scaled) v *= 3.0;
  for (double& v : shifted) v += 17.0;
  CHECK(delta_hat(b.design, scaled, w_star, 0.7 / 3.0) ==
        doctest::Approx(base).epsilon(1e-12));
  CHECK(delta_hat(b.design, shifted, w_star, 0.7) ==
        doctest::Approx(base).epsilon(1e-12));

  for (WeightKind kind : {WeightKind::equal, WeightKind::block_size,
                          WeightKind::treated_size}) {
    const Weights w = block_weights(b.design, kind);
    CHECK(delta_hat(b.design, x, w, 0.7) <= base * (1.0 + 1e-12));
  }
}

TEST_CASE("power study at beta zero matches the normal tail") {
  PowerStudySpec spec;
  spec.replicates = 4000;
  spec.seed = SeedSpec{2024};
  spec.z_star = 1.645;
  spec.betas = {0.0};
  spec.blocks = {{2, 1, 300}};
  spec.sizes.kind = ClusterSizeGen::Kind::fixed;
  spec.sizes.value = 1.0;

  const PowerStudyResult res = run_power_study(spec);
  REQUIRE(res.rows.size() == 1);
  const PowerRow& row = res.rows[0];
  CHECK(row.delta == 0.0);
  CHECK(row.power_theory == doctest::Approx(normal_sf(1.645)).epsilon(1e-12));
  const double se = std::sqrt(row.power_theory * (1.0 - row.power_theory) /
                              static_cast<double>(spec.replicates));
  CHECK(std::abs(row.power_mc - row.power_theory) <= 4.0 * se);
}

TEST_CASE("power climbs with beta and tracks the normal curve") {
  PowerStudySpec spec;
  spec.replicates = 4000;
  spec.seed = SeedSpec{31415};
  spec.betas = {0.0, 0.15, 0.3};
  spec.blocks = {{2, 1, 400}};
  spec.sizes.kind = ClusterSizeGen::Kind::fixed;
  spec.sizes.value = 1.0;

  const PowerStudyResult res = run_power_study(spec);
  REQUIRE(res.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const PowerRow& row = res.rows[i];
    CHECK(row.delta ==
          doctest::Approx(10.0 * spec.betas[i]).epsilon(1e-9));
    CHECK(std::abs(row.power_mc - row.power_theory) <= 0.035);
  }
  CHECK(res.rows[0].power_mc < res.rows[1].power_mc);
  CHECK(res.rows[1].power_mc < res.rows[2].power_mc);
}

TEST_CASE("harmonic-star weighting wins the paired power comparison") {
  PowerStudySpec spec;
  spec.replicates = 4000;
  spec.seed = SeedSpec{977};
  spec.betas = {0.25};
  spec.weights = {WeightKind::harmonic_star, WeightKind::equal,
                  WeightKind::block_size};
  spec.blocks = {{2, 1, 150}, {6, 3, 50}};
  spec.sizes.kind = ClusterSizeGen::Kind::uniform_int;
  spec.sizes.lo = 1;
  spec.sizes.hi = 3;

  const PowerStudyResult res = run_power_study(spec);
  REQUIRE(res.rows.size() == 3);
  const PowerRow& star = res.rows[0];
  CHECK(star.weights == "harmonic");
  for (std::size_t s = 1; s < 3; ++s) {
    const PowerRow& other = res.rows[s];
    CHECK(star.delta >= other.delta * (1.0 - 1e-12));
    CHECK(star.power_mc >=
          other.power_mc - 2.0 * (star.stderr_est + other.stderr_est));
  }

  const PowerStudyResult rerun = run_power_study(spec);
  REQUIRE(rerun.rows.size() == res.rows.size());
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    CHECK(rerun.rows[i].power_mc == res.rows[i].power_mc);
    CHECK(rerun.rows[i].delta == res.rows[i].delta);
  }
}

TEST_CASE("size study control test is calibrated") {
  SizeStudySpec spec;
  spec.replicates = 20'000;
  spec.seed = SeedSpec{606};
  spec.levels = {0.05, 0.2};
  spec.tests = {"control"};
  spec.blocks = {{4, 2, 3}};
  spec.sizes.kind = ClusterSizeGen::Kind::fixed;
  spec.sizes.value = 1.0;

  const SizeStudyResult res = run_size_study(spec);
  REQUIRE(res.rows.size() == 2);
  for (const SizeRow& row : res.rows) {
    CHECK(row.evaluated == spec.replicates);
    const double se = std::sqrt(row.nominal * (1.0 - row.nominal) /
                                static_cast<double>(spec.replicates));
    CHECK(std::abs(row.actual - row.nominal) <= 4.0 * se);
  }
  REQUIRE(res.p_values.size() == 1);
  const auto& sorted = res.p_values[0].sorted_p;
  REQUIRE(sorted.size() == spec.replicates);
  CHECK(std::is_sorted(sorted.begin(), sorted.end()));
  CHECK(std::abs(sorted[sorted.size() / 2] - 0.5) < 0.02);

  const SizeStudyResult rerun = run_size_study(spec);
  for (std::size_t i = 0; i < res.rows.size(); ++i)
    CHECK(rerun.rows[i].actual == res.rows[i].actual);
}

TEST_CASE("size study validates its spec") {
  SizeStudySpec spec;
  spec.replicates = 9999;
  spec.tests = {"control"};
  spec.blocks = {{4, 2, 1}};
  CHECK_THROWS_AS(run_size_study(spec), InputError);

  spec.replicates = 10'000;
  spec.levels = {0.0};
  CHECK_THROWS_AS(run_size_study(spec), InputError);
  spec.levels = {1.0};
  CHECK_THROWS_AS(run_size_study(spec), InputError);

  spec.levels = {0.05};
  spec.tests = {"wilcoxon"};
  CHECK_THROWS_AS(run_size_study(spec), InputError);

  spec.tests = {"d2"};  // no covariates supplied
  CHECK_THROWS_AS(run_size_study(spec), InputError);
}

TEST_CASE("omnibus test holds its level in a small size study") {
  SizeStudySpec spec;
  spec.replicates = 20'000;
  spec.seed = SeedSpec{512};
  spec.levels = {0.05, 0.10};
  spec.tests = {"d2", "noclus", "control"};
  spec.blocks = {{4, 2, 4}};
  spec.sizes.kind = ClusterSizeGen::Kind::uniform_int;
  spec.sizes.lo = 1;
  spec.sizes.hi = 3;
  spec.covariates = {{CovariateGen::Kind::normal, "a"},
                     {CovariateGen::Kind::normal, "b"}};

  const SizeStudyResult res = run_size_study(spec);
  CHECK(res.d2_df == 2);
  CHECK(res.separations == 0);
  REQUIRE(res.rows.size() == 6);
  for (const SizeRow& row : res.rows) {
    CHECK(row.evaluated == spec.replicates);
    if (row.test == "d2") {
      const double se = std::sqrt(row.nominal * (1.0 - row.nominal) /
                                  static_cast<double>(row.evaluated));
      CHECK(row.actual <= row.nominal + 4.0 * se);
    }
    if (row.test == "noclus") CHECK(row.actual > 0.0);
  }
  REQUIRE(res.p_values.size() == 3);
  for (const TestPValues& tp : res.p_values) {
    CHECK(tp.sorted_p.size() == spec.replicates);
    CHECK(tp.sorted_p.front() >= 0.0);
    CHECK(tp.sorted_p.back() <= 1.0);
  }
}

TEST_CASE("logistic replicates run and separations are tallied") {
  SizeStudySpec spec;
  spec.replicates = 10'000;
  spec.seed = SeedSpec{888};
  spec.levels = {0.05};
  spec.tests = {"logistic"};
  spec.blocks = {{3, 1, 4}};
  spec.sizes.kind = ClusterSizeGen::Kind::fixed;
  spec.sizes.value = 2.0;
  spec.covariates = {{CovariateGen::Kind::normal, "x"}};

  const SizeStudyResult res = run_size_study(spec);
  CHECK(res.logistic_df == 1);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].evaluated == spec.replicates);
  CHECK(res.rows[0].actual > 0.0);
  CHECK(res.rows[0].actual < 1.0);
  CHECK(res.separations <= spec.replicates);
}

TEST_CASE("generated study data is reproducible and well shaped") {
  const std::vector<BlockSpec> blocks = {{3, 1, 2}, {4, 2, 1}};
  ClusterSizeGen sizes;
  sizes.kind = ClusterSizeGen::Kind::lognormal_int;
  sizes.log_mean = 1.2;
  sizes.log_sd = 0.6;
  sizes.min = 2;

  std::vector<CovariateGen> covs(4);
  covs[0] = {CovariateGen::Kind::binomial_rate, "events"};
  covs[1] = {CovariateGen::Kind::bernoulli, "flag"};
  covs[1].p = 0.3;
  covs[2] = {CovariateGen::Kind::categorical, "ward"};
  covs[2].levels = 4;
  covs[2].zipf = 0.7;
  covs[3] = {CovariateGen::Kind::lognormal, "load"};
  covs[3].sigma = 0.5;

  const SeedSpec seed{4242};
  const GeneratedStudyData a = generate_study_data(blocks, sizes, covs, seed);
  const GeneratedStudyData b = generate_study_data(blocks, sizes, covs, seed);
  CHECK(a.totals.values == b.totals.values);
  REQUIRE(a.clusters.size() == 10);
  CHECK(a.totals.names == std::vector<std::string>{"events", "flag", "ward_1",
                                                   "ward_2", "ward_3",
                                                   "load"});

  double total_m = 0.0;
  for (std::size_t i = 0; i < a.clusters.size(); ++i) {
    const ClusterRecord& r = a.clusters[i];
    CHECK(r.m >= 2.0);
    total_m += r.m;
    CHECK(a.totals.at(i, 0) <= r.m);         // event counts
    CHECK(a.totals.at(i, 1) <= r.m);         // bernoulli totals
    CHECK(a.totals.at(i, 0) >= 0.0);
    double ward_sum = 0.0;
    for (std::size_t l = 2; l <= 4; ++l) ward_sum += a.totals.at(i, l);
    CHECK(ward_sum <= r.m);                  // one-hot rows
    CHECK(a.totals.at(i, 5) > 0.0);          // lognormal totals
    CHECK(r.x == std::vector<double>(a.totals.values.begin() + 6 * i,
                                     a.totals.values.begin() + 6 * (i + 1)));
  }
  CHECK(static_cast<double>(a.unit_cluster.size()) == total_m);
  CHECK(a.unit_x0.size() == a.unit_cluster.size());

  const GeneratedStudyData c =
      generate_study_data(blocks, sizes, covs, SeedSpec{4243});
  CHECK(c.totals.values != a.totals.values);

  // Covariates draw from dedicated streams: dropping the later ones leaves
  // the first column untouched.
  const GeneratedStudyData first_only = generate_study_data(
      blocks, sizes, {covs[0]}, seed);
  for (std::size_t i = 0; i < a.clusters.size(); ++i)
    CHECK(first_only.totals.at(i, 0) == a.totals.at(i, 0));
}

TEST_CASE("study spec json parses into the right fields") {
  const std::string size_text = R"({
    "type": "size",
    "replicates": 20000,
    "seed": 99,
    "levels": [0.01, 0.05],
    "tests": ["d2", "logistic"],
    "weights": "equal",
    "blocks": [{"n": 21, "treated": 14}, {"n": 4, "treated": 2, "repeat": 3}],
    "sizes": {"kind": "lognormal", "log_mean": 4.7, "log_sd": 0.55, "min": 20},
    "covariates": [
      {"kind": "binomial-rate", "name": "ever", "alpha": 2, "beta": 4},
      {"kind": "categorical", "name": "ward", "levels": 30, "zipf": 0.7}
    ]
  })";
  const StudySpec parsed = parse_study_spec(size_text);
  const auto* size = std::get_if<SizeStudySpec>(&parsed.spec);
  REQUIRE(size != nullptr);
  CHECK(size->replicates == 20000);
  CHECK(size->seed.master == 99);
  CHECK(size->levels == std::vector<double>{0.01, 0.05});
  CHECK(size->tests == std::vector<std::string>{"d2", "logistic"});
  CHECK(size->weights == WeightKind::equal);
  REQUIRE(size->blocks.size() == 2);
  CHECK(size->blocks[0].n == 21);
  CHECK(size->blocks[0].n_treated == 14);
  CHECK(size->blocks[0].repeat == 1);
  CHECK(size->blocks[1].repeat == 3);
  CHECK(size->sizes.kind == ClusterSizeGen::Kind::lognormal_int);
  CHECK(size->sizes.log_mean == 4.7);
  CHECK(size->sizes.min == 20);
  REQUIRE(size->covariates.size() == 2);
  CHECK(size->covariates[0].kind == CovariateGen::Kind::binomial_rate);
  CHECK(size->covariates[0].rate_alpha == 2.0);
  CHECK(size->covariates[1].kind == CovariateGen::Kind::categorical);
  CHECK(size->covariates[1].levels == 30);
  CHECK(size->covariates[1].zipf == 0.7);

  const std::string power_text = R"({
    "type": "power",
    "replicates": 5000,
    "seed": 7,
    "z_star": 1.645,
    "betas": [0, 0.1, 0.2],
    "weights": ["harmonic", "equal", "block-size"],
    "blocks": [{"n": 2, "treated": 1, "repeat": 2000}],
    "sizes": {"kind": "fixed", "value": 1},
    "target_delta_per_beta": 10
  })";
  const StudySpec parsed_power = parse_study_spec(power_text);
  const auto* power = std::get_if<PowerStudySpec>(&parsed_power.spec);
  REQUIRE(power != nullptr);
  CHECK(power->z_star == 1.645);
  CHECK(power->betas == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(power->weights ==
        std::vector<WeightKind>{WeightKind::harmonic_star, WeightKind::equal,
                                WeightKind::block_size});
  CHECK(power->blocks[0].repeat == 2000);
  CHECK(power->target_delta_per_beta == 10.0);
}

TEST_CASE("study spec errors point at the offending field") {
  expect_spec_error("{", "not valid JSON");
  expect_spec_error(R"({"replicates": 20000})", "/type");
  expect_spec_error(R"({"type": "sizzle"})", "/type");
  expect_spec_error(
      R"({"type": "size", "replicates": 5000, "levels": [0.05],
          "tests": ["d2"], "blocks": [{"n": 4, "treated": 2}],
          "sizes": {"kind": "fixed", "value": 1}})",
      "/replicates");
  expect_spec_error(
      R"({"type": "size", "replicates": 20000, "levels": [0.05, 1.5],
          "tests": ["d2"], "blocks": [{"n": 4, "treated": 2}],
          "sizes": {"kind": "fixed", "value": 1}})",
      "/levels/1");
  expect_spec_error(
      R"({"type": "size", "replicates": 20000, "levels": [0.05],
          "tests": ["d2"], "blocks": [{"n": 1, "treated": 1}],
          "sizes": {"kind": "fixed", "value": 1}})",
      "/blocks/0/n");
  expect_spec_error(
      R"({"type": "size", "replicates": 20000, "levels": [0.05],
          "tests": ["d2"], "blocks": [{"n": 4, "treated": 2}],
          "sizes": {"kind": "fixed", "value": 1},
          "covariates": [{"kind": "cauchy", "name": "x"}]})",
      "/covariates/0/kind");
  expect_spec_error(
      R"({"type": "size", "replicates": 20000, "levels": [0.05],
          "tests": ["d2"], "blocks": [{"n": 4, "treated": 2}],
          "sizes": {"kind": "fixed", "value": 1}, "fudge": true})",
      "/fudge");
  expect_spec_error(
      R"({"type": "power", "replicates": 5000, "betas": [-0.1],
          "blocks": [{"n": 2, "treated": 1}],
          "sizes": {"kind": "fixed", "value": 1}})",
      "/betas/0");
  expect_spec_error(
      R"({"type": "power", "replicates": 5000, "betas": [0.1],
          "weights": ["bogus"],
          "blocks": [{"n": 2, "treated": 1}],
          "sizes": {"kind": "fixed", "value": 1}})",
      "/weights/0");
}
