// Microbenchmarks for the hot paths: statistic evaluation, assignment
// sampling, the Monte Carlo mid-p loop, logistic refits, and the dense
// eigendecomposition behind the omnibus statistic. Fixtures are synthetic
// and deterministic so runs are comparable across machines.
#include <benchmark/benchmark.h>

#include "randbal/assignment.hpp"
#include "randbal/balance.hpp"
#include "randbal/comparators.hpp"
#include "randbal/data_model.hpp"
#include "randbal/experiments.hpp"
#include "randbal/linalg.hpp"
#include "randbal/omnibus.hpp"
#include "randbal/stats.hpp"

#include <vector>

using namespace randbal;

namespace {

struct Fixture {
  Design design;
  CovariateMatrix x;
  std::vector<std::uint8_t> z;
  Weights w;
};

// B blocks of (n, n_treated) with k covariates and mildly varied sizes.
Fixture make_fixture(std::size_t n_blocks, std::size_t n, std::size_t n_t,
                     std::size_t k) {
  std::vector<BlockSpec> blocks = {{n, n_t, n_blocks}};
  ClusterSizeGen sizes;
  sizes.kind = ClusterSizeGen::Kind::uniform_int;
  sizes.lo = 1;
  sizes.hi = 4;
  std::vector<CovariateGen> covs;
  for (std::size_t j = 0; j < k; ++j) {
    CovariateGen g;
    g.name = "x" + std::to_string(j);
    covs.push_back(g);
  }
  GeneratedStudyData data = generate_study_data(blocks, sizes, covs, {17});
  DesignBuild db = build_design(data.clusters);
  Fixture f{std::move(db.design), select_rows(data.totals, db.kept_rows),
            {}, {}};
  f.z = observed_assignment(f.design);
  f.w = block_weights(f.design, WeightKind::harmonic_star);
  return f;
}

void BM_compute_d(benchmark::State& state) {
  const Fixture f = make_fixture(25, 4, 2, 1);
  const std::vector<double> x = f.x.column(0);
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_d(f.design, x, f.z, f.w));
}
BENCHMARK(BM_compute_d);

void BM_d_evaluator(benchmark::State& state) {
  const Fixture f = make_fixture(25, 4, 2, 4);
  DEvaluator ev(f.design, f.x, f.w);
  std::vector<double> d(ev.dims());
  for (auto _ : state) {
    ev.eval(f.z, d.data());
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_d_evaluator);

void BM_variance_d(benchmark::State& state) {
  const Fixture f = make_fixture(25, 4, 2, 8);
  for (auto _ : state)
    benchmark::DoNotOptimize(variance_d(f.design, f.x, f.w));
}
BENCHMARK(BM_variance_d);

void BM_sample_uniform(benchmark::State& state) {
  const Fixture f = make_fixture(25, 4, 2, 1);
  Rng rng({3}, StreamDomain::generic, 0);
  std::vector<std::uint8_t> z(f.design.n_clusters());
  for (auto _ : state) {
    sample_uniform_into(f.design, rng, z);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(BM_sample_uniform);

void BM_sample_biased(benchmark::State& state) {
  const Fixture f = make_fixture(25, 4, 2, 1);
  BiasModel model;
  model.beta = 0.3;
  const std::vector<double> psi = psi_values(f.x, model);
  BiasSampler sampler(f.design, psi, model);
  Rng rng({3}, StreamDomain::generic, 0);
  std::vector<std::uint8_t> z(f.design.n_clusters());
  for (auto _ : state) {
    sampler.draw(rng, z);
    benchmark::DoNotOptimize(z.data());
  }
}
BENCHMARK(BM_sample_biased);

// One full Monte Carlo mid-p at 10^4 replicates on a 21-cluster design,
// the shape of a typical interactive CLI run.
void BM_mc_midp(benchmark::State& state) {
  const Fixture f = make_fixture(1, 21, 14, 4);
  MidPOptions opt;
  opt.mode = MidPMode::monte_carlo;
  opt.replicates = 10'000;
  opt.seed = {11};
  for (auto _ : state)
    benchmark::DoNotOptimize(mid_p(f.design, f.x.column(0), f.z, f.w, opt));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          10'000);
}
BENCHMARK(BM_mc_midp);

void BM_fit_logistic(benchmark::State& state) {
  const Fixture f = make_fixture(1, 100, 22, 38);
  const std::size_t n = f.design.n_clusters(), k = f.x.cols();
  Matrix m(n, k + 1);
  for (std::size_t r = 0; r < n; ++r) {
    m(r, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) m(r, j + 1) = f.x.at(r, j);
  }
  LogisticOptions opt;
  opt.force_prefix = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_logistic(f.z, m, opt));
}
BENCHMARK(BM_fit_logistic);

void BM_jacobi_eigen(benchmark::State& state) {
  const std::size_t n = 40;
  Matrix a(n, n);
  Rng rng({9}, StreamDomain::generic, 0);
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.normal();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < n; ++t) s += g(t, i) * g(t, j);
      a(i, j) = s;
    }
  for (auto _ : state)
    benchmark::DoNotOptimize(jacobi_eigen_symmetric(a));
}
BENCHMARK(BM_jacobi_eigen);

void BM_chi2_sf(benchmark::State& state) {
  double x = 20.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_sf(x, 38));
    x = x < 60.0 ? x + 0.001 : 20.0;
  }
}
BENCHMARK(BM_chi2_sf);

}  // namespace

BENCHMARK_MAIN();
