#include "randbal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "randbal/assignment.hpp"
#include "randbal/balance.hpp"
#include "randbal/common.hpp"
#include "randbal/comparators.hpp"
#include "randbal/data_model.hpp"
#include "randbal/omnibus.hpp"
#include "randbal/stats.hpp"

namespace randbal {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double block_variance(const Design& design, const Block& block,
                      const std::vector<double>& x) {
  if (block.n < 2) return 0.0;
  double mean = 0.0;
  for (std::size_t c : block.clusters) mean += x[c];
  mean /= static_cast<double>(block.n);
  double ss = 0.0;
  for (std::size_t c : block.clusters) {
    const double dev = x[c] - mean;
    ss += dev * dev;
  }
  return ss / static_cast<double>(block.n - 1);
}

}  // namespace

double balance_ratio(const Design& design, const std::vector<double>& x) {
  const std::size_t n = design.n_clusters();
  if (x.size() != n)
    throw InputError("balance_ratio: covariate has " + std::to_string(x.size()) +
                     " values for " + std::to_string(n) + " clusters");
  if (n < 2)
    throw DesignError("balance_ratio needs at least two clusters");

  const Weights w = block_weights(design, WeightKind::harmonic_star);
  const double var = variance_of_d(design, x, w);

  double mean = 0.0;
  double max_abs = 0.0;
  std::vector<double> per_unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    per_unit[i] = x[i] / design.blocks[design.block_index[i]].m_bar;
    mean += per_unit[i];
    max_abs = std::max(max_abs, std::abs(per_unit[i]));
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : per_unit) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  // The cutoff absorbs rounding noise from a constant covariate, whose
  // accumulated mean is not bitwise exact.
  if (!(sd > 1e-12 * max_abs))
    throw DesignError(
        "balance ratio undefined: the covariate has no spread across clusters");
  return std::sqrt(std::max(var, 0.0)) / sd;
}

std::vector<std::size_t> apportion_treated(
    const std::vector<std::size_t>& block_sizes, std::size_t total_treated) {
  const std::size_t nb = block_sizes.size();
  std::vector<std::size_t> out(nb, 0);
  std::vector<std::size_t> eligible;
  std::size_t eligible_clusters = 0;
  std::size_t capacity = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (block_sizes[b] >= 2) {
      eligible.push_back(b);
      eligible_clusters += block_sizes[b];
      capacity += block_sizes[b] - 1;
    }
  }
  if (eligible.empty())
    throw DesignError(
        "no block can hold both a treated and a control cluster");
  if (total_treated < eligible.size() || total_treated > capacity)
    throw DesignError("a treated total of " + std::to_string(total_treated) +
                      " cannot be split across these blocks; the feasible "
                      "range is [" +
                      std::to_string(eligible.size()) + ", " +
                      std::to_string(capacity) + "]");

  std::vector<double> quota(nb, 0.0);
  std::size_t placed = 0;
  for (std::size_t b : eligible) {
    quota[b] = static_cast<double>(total_treated) *
               static_cast<double>(block_sizes[b]) /
               static_cast<double>(eligible_clusters);
    const auto floor_q = static_cast<std::size_t>(quota[b]);
    out[b] = std::clamp<std::size_t>(floor_q, 1, block_sizes[b] - 1);
    placed += out[b];
  }
  while (placed < total_treated) {
    std::size_t best = nb;
    double best_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t b : eligible) {
      if (out[b] >= block_sizes[b] - 1) continue;
      const double gap = quota[b] - static_cast<double>(out[b]);
      if (gap > best_gap) {
        best_gap = gap;
        best = b;
      }
    }
    ++out[best];
    ++placed;
  }
  while (placed > total_treated) {
    std::size_t best = nb;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t b : eligible) {
      if (out[b] <= 1) continue;
      const double gap = quota[b] - static_cast<double>(out[b]);
      if (gap < best_gap) {
        best_gap = gap;
        best = b;
      }
    }
    --out[best];
    --placed;
  }
  return out;
}

CompareResult compare_stratifications(
    const std::vector<ClusterRecord>& clusters,
    const std::vector<std::string>& covariate_names,
    const std::vector<Candidate>& candidates, std::size_t total_treated) {
  CompareResult result;
  result.covariates = covariate_names;
  for (const Candidate& cand : candidates) {
    if (cand.labels.size() != clusters.size())
      throw InputError("candidate '" + cand.name + "' supplies " +
                       std::to_string(cand.labels.size()) +
                       " block labels for " + std::to_string(clusters.size()) +
                       " clusters");
    CandidateRow row;
    row.candidate = cand.name;

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      groups[cand.labels[i]].push_back(i);

    std::vector<std::size_t> sizes;
    sizes.reserve(groups.size());
    for (const auto& [label, members] : groups) {
      sizes.push_back(members.size());
      if (members.size() == 1)
        row.warnings.push_back("block '" + label +
                               "' holds a single cluster and cannot receive "
                               "both arms; it is dropped");
    }

    std::vector<std::size_t> treated;
    try {
      treated = apportion_treated(sizes, total_treated);
    } catch (const DesignError& e) {
      throw DesignError("candidate '" + cand.name + "': " + e.what());
    }

    std::vector<ClusterRecord> relabeled = clusters;
    std::size_t g = 0;
    for (const auto& [label, members] : groups) {
      const std::size_t n_t = treated[g++];
      for (std::size_t k = 0; k < members.size(); ++k) {
        relabeled[members[k]].block_id = label;
        relabeled[members[k]].z = k < n_t ? 1 : 0;
      }
    }

    DesignBuild built = build_design(relabeled);
    for (const ExcludedBlock& ex : built.design.excluded) {
      if (ex.n > 1)
        row.warnings.push_back("block '" + ex.block_id + "' dropped: " +
                               ex.reason);
    }

    const CovariateMatrix mat = select_rows(
        matrix_from_clusters(relabeled, covariate_names), built.kept_rows);
    row.ratios.reserve(covariate_names.size());
    for (std::size_t j = 0; j < covariate_names.size(); ++j)
      row.ratios.push_back(balance_ratio(built.design, mat.column(j)));
    result.rows.push_back(std::move(row));
  }
  return result;
}

// --- generators ---------------------------------------------------------

namespace {

// Marsaglia-Tsang; the a < 1 case boosts through a + 1.
double gamma_draw(Rng& rng, double a) {
  if (a < 1.0) {
    double u;
    do {
      u = rng.uniform01();
    } while (u <= 0.0);
    return gamma_draw(rng, a + 1.0) * std::pow(u, 1.0 / a);
  }
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double xn, v;
    do {
      xn = rng.normal();
      v = 1.0 + c * xn;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * xn * xn * xn * xn) return d * v;
    if (std::log(u) < 0.5 * xn * xn + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_draw(Rng& rng, double a, double b) {
  const double ga = gamma_draw(rng, a);
  const double gb = gamma_draw(rng, b);
  const double sum = ga + gb;
  return sum > 0.0 ? ga / sum : 0.5;
}

void validate_size_gen(const ClusterSizeGen& g) {
  switch (g.kind) {
    case ClusterSizeGen::Kind::fixed:
      if (!(g.value >= 1.0) || g.value != std::floor(g.value))
        throw InputError("fixed cluster size must be an integer of at least 1");
      break;
    case ClusterSizeGen::Kind::uniform_int:
      if (g.lo < 1 || g.hi < g.lo)
        throw InputError("uniform cluster sizes need 1 <= lo <= hi");
      break;
    case ClusterSizeGen::Kind::lognormal_int:
      if (!(g.log_sd >= 0.0) || !std::isfinite(g.log_mean))
        throw InputError("lognormal cluster sizes need a finite log mean and "
                         "a nonnegative log sd");
      if (g.min < 1)
        throw InputError("minimum cluster size must be at least 1");
      break;
  }
}

std::uint64_t draw_size(Rng& rng, const ClusterSizeGen& g) {
  switch (g.kind) {
    case ClusterSizeGen::Kind::fixed:
      return static_cast<std::uint64_t>(g.value);
    case ClusterSizeGen::Kind::uniform_int:
      return g.lo + rng.below(g.hi - g.lo + 1);
    case ClusterSizeGen::Kind::lognormal_int: {
      const double raw = std::exp(g.log_mean + g.log_sd * rng.normal());
      const auto rounded = static_cast<std::uint64_t>(std::llround(
          std::min(raw, 1e15)));
      return std::max<std::uint64_t>(g.min, rounded);
    }
  }
  return 1;
}

std::size_t column_count(const CovariateGen& g) {
  return g.kind == CovariateGen::Kind::categorical ? g.levels - 1 : 1;
}

void validate_covariate_gen(const CovariateGen& g) {
  if (g.name.empty()) throw InputError("covariate generators need a name");
  switch (g.kind) {
    case CovariateGen::Kind::normal:
      break;
    case CovariateGen::Kind::lognormal:
      if (!(g.sigma > 0.0))
        throw InputError("lognormal covariate '" + g.name +
                         "' needs sigma > 0");
      break;
    case CovariateGen::Kind::bernoulli:
      if (!(g.p > 0.0 && g.p < 1.0))
        throw InputError("bernoulli covariate '" + g.name +
                         "' needs p strictly inside (0, 1)");
      break;
    case CovariateGen::Kind::binomial_rate:
      if (!(g.rate_alpha > 0.0 && g.rate_beta > 0.0))
        throw InputError("binomial-rate covariate '" + g.name +
                         "' needs positive Beta shape parameters");
      break;
    case CovariateGen::Kind::categorical:
      if (g.levels < 2)
        throw InputError("categorical covariate '" + g.name +
                         "' needs at least two levels");
      if (!(g.zipf >= 0.0))
        throw InputError("categorical covariate '" + g.name +
                         "' needs a nonnegative zipf exponent");
      break;
  }
}

}  // namespace

GeneratedStudyData generate_study_data(const std::vector<BlockSpec>& blocks,
                                       const ClusterSizeGen& sizes,
                                       const std::vector<CovariateGen>& covs,
                                       SeedSpec seed) {
  if (blocks.empty()) throw InputError("the study design needs blocks");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const BlockSpec& b = blocks[i];
    if (b.n < 2)
      throw InputError("block spec " + std::to_string(i) +
                       ": blocks need at least two clusters");
    if (b.n_treated < 1 || b.n_treated >= b.n)
      throw InputError("block spec " + std::to_string(i) +
                       ": treated count must lie in [1, n-1]");
    if (b.repeat < 1)
      throw InputError("block spec " + std::to_string(i) +
                       ": repeat must be at least 1");
  }
  validate_size_gen(sizes);
  for (const CovariateGen& g : covs) validate_covariate_gen(g);

  GeneratedStudyData out;
  Rng size_rng(seed, StreamDomain::study_covariates, 0);
  char block_id[16];
  char cluster_id[16];
  std::size_t block_counter = 0;
  std::size_t cluster_counter = 0;
  for (const BlockSpec& spec : blocks) {
    for (std::size_t rep = 0; rep < spec.repeat; ++rep) {
      ++block_counter;
      std::snprintf(block_id, sizeof block_id, "b%05zu", block_counter);
      for (std::size_t i = 0; i < spec.n; ++i) {
        ++cluster_counter;
        std::snprintf(cluster_id, sizeof cluster_id, "c%06zu",
                      cluster_counter);
        ClusterRecord rec;
        rec.cluster_id = cluster_id;
        rec.block_id = block_id;
        rec.z = i < spec.n_treated ? 1 : 0;
        rec.m = static_cast<double>(draw_size(size_rng, sizes));
        out.clusters.push_back(std::move(rec));
      }
    }
  }

  const std::size_t n_clusters = out.clusters.size();
  for (std::size_t ci = 0; ci < n_clusters; ++ci) {
    const auto m = static_cast<std::size_t>(out.clusters[ci].m);
    for (std::size_t u = 0; u < m; ++u) out.unit_cluster.push_back(ci);
  }

  std::size_t total_cols = 0;
  for (const CovariateGen& g : covs) total_cols += column_count(g);
  out.totals.n_rows = n_clusters;
  out.totals.names.reserve(total_cols);
  for (const CovariateGen& g : covs) {
    const std::size_t cols = column_count(g);
    if (g.kind == CovariateGen::Kind::categorical) {
      for (std::size_t l = 1; l <= cols; ++l)
        out.totals.names.push_back(g.name + "_" + std::to_string(l));
    } else {
      out.totals.names.push_back(g.name);
    }
  }
  out.totals.values.assign(n_clusters * total_cols, 0.0);

  std::size_t col = 0;
  for (std::size_t gi = 0; gi < covs.size(); ++gi) {
    const CovariateGen& g = covs[gi];
    Rng rng(seed, StreamDomain::study_covariates, 1 + gi);

    std::vector<double> level_cum;
    if (g.kind == CovariateGen::Kind::categorical) {
      level_cum.resize(g.levels);
      double total = 0.0;
      for (std::size_t l = 0; l < g.levels; ++l) {
        total += std::pow(static_cast<double>(l + 1), -g.zipf);
        level_cum[l] = total;
      }
      for (double& c : level_cum) c /= total;
    }

    for (std::size_t ci = 0; ci < n_clusters; ++ci) {
      const auto m = static_cast<std::size_t>(out.clusters[ci].m);
      double rate = 0.0;
      if (g.kind == CovariateGen::Kind::binomial_rate)
        rate = beta_draw(rng, g.rate_alpha, g.rate_beta);
      for (std::size_t u = 0; u < m; ++u) {
        double first_col_value = 0.0;
        switch (g.kind) {
          case CovariateGen::Kind::normal:
            first_col_value = rng.normal();
            out.totals.at(ci, col) += first_col_value;
            break;
          case CovariateGen::Kind::lognormal:
            first_col_value = std::exp(g.sigma * rng.normal());
            out.totals.at(ci, col) += first_col_value;
            break;
          case CovariateGen::Kind::bernoulli:
            first_col_value = rng.uniform01() < g.p ? 1.0 : 0.0;
            out.totals.at(ci, col) += first_col_value;
            break;
          case CovariateGen::Kind::binomial_rate:
            first_col_value = rng.uniform01() < rate ? 1.0 : 0.0;
            out.totals.at(ci, col) += first_col_value;
            break;
          case CovariateGen::Kind::categorical: {
            const double u01 = rng.uniform01();
            std::size_t level = 0;
            while (level + 1 < g.levels && u01 >= level_cum[level]) ++level;
            if (level >= 1) out.totals.at(ci, col + level - 1) += 1.0;
            first_col_value = level == 1 ? 1.0 : 0.0;
            break;
          }
        }
        if (gi == 0) out.unit_x0.push_back(first_col_value);
      }
    }
    col += column_count(g);
  }

  for (std::size_t ci = 0; ci < n_clusters; ++ci) {
    out.clusters[ci].x.resize(total_cols);
    for (std::size_t j = 0; j < total_cols; ++j)
      out.clusters[ci].x[j] = out.totals.at(ci, j);
  }
  return out;
}

// --- size study ----------------------------------------------------------

namespace {

enum class TestKind { d2, logistic, noclus, control };

TestKind test_kind_from_name(const std::string& name) {
  if (name == "d2") return TestKind::d2;
  if (name == "logistic") return TestKind::logistic;
  if (name == "noclus") return TestKind::noclus;
  if (name == "control") return TestKind::control;
  throw InputError("unknown test '" + name +
                   "'; choose from d2, logistic, noclus, control");
}

}  // namespace

SizeStudyResult run_size_study(const SizeStudySpec& spec) {
  if (spec.replicates < 10'000)
    throw InputError("size studies need at least 10000 replicates");
  if (spec.levels.empty())
    throw InputError("size studies need at least one nominal level");
  for (double a : spec.levels)
    if (!(a > 0.0 && a < 1.0))
      throw InputError("nominal levels must lie strictly inside (0, 1)");
  if (spec.tests.empty())
    throw InputError("size studies need at least one test");

  std::vector<std::string> test_names;
  std::vector<TestKind> kinds;
  for (const std::string& t : spec.tests) {
    const TestKind k = test_kind_from_name(t);
    if (std::find(test_names.begin(), test_names.end(), t) != test_names.end())
      continue;
    test_names.push_back(t);
    kinds.push_back(k);
  }
  const bool want_d2 =
      std::find(kinds.begin(), kinds.end(), TestKind::d2) != kinds.end();
  const bool want_logistic =
      std::find(kinds.begin(), kinds.end(), TestKind::logistic) != kinds.end();
  const bool want_noclus =
      std::find(kinds.begin(), kinds.end(), TestKind::noclus) != kinds.end();
  if ((want_d2 || want_logistic || want_noclus) && spec.covariates.empty())
    throw InputError("the requested tests need at least one covariate");

  const GeneratedStudyData data =
      generate_study_data(spec.blocks, spec.sizes, spec.covariates, spec.seed);
  const DesignBuild built = build_design(data.clusters);
  const Design& design = built.design;
  const CovariateMatrix x = select_rows(data.totals, built.kept_rows);
  const Weights w = block_weights(design, spec.weights);

  SizeStudyResult result;
  result.replicates = spec.replicates;

  std::optional<OmnibusContext> ctx;
  if (want_d2) {
    ctx.emplace(make_omnibus_context(design, x, w));
    result.d2_df = ctx->df;
  }
  std::optional<DevianceTester> tester;
  if (want_logistic) {
    tester.emplace(design, x);
    result.logistic_df = tester->df();
  }

  std::vector<double> unit_x;
  std::vector<std::size_t> unit_row;
  if (want_noclus) {
    std::vector<std::size_t> design_row(data.clusters.size(),
                                        std::size_t(-1));
    for (std::size_t i = 0; i < built.kept_rows.size(); ++i)
      design_row[built.kept_rows[i]] = i;
    for (std::size_t u = 0; u < data.unit_cluster.size(); ++u) {
      const std::size_t dr = design_row[data.unit_cluster[u]];
      if (dr == std::size_t(-1)) continue;
      unit_row.push_back(dr);
      unit_x.push_back(data.unit_x0[u]);
    }
  }

  const std::uint64_t n_reps = spec.replicates;
  const std::size_t n_tests = kinds.size();
  std::vector<std::vector<double>> pv(n_tests,
                                      std::vector<double>(n_reps, kNan));
  std::vector<std::uint8_t> separated(want_logistic ? n_reps : 0, 0);

  parallel_chunks(n_reps, [&](unsigned, std::size_t begin, std::size_t end) {
    std::vector<std::uint8_t> z(design.n_clusters());
    std::vector<double> d(x.cols());
    std::optional<DEvaluator> evaluator;
    if (ctx) evaluator.emplace(design, x, w);
    std::vector<std::uint8_t> z_units(unit_row.size());
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(spec.seed, StreamDomain::study_replicate, r);
      sample_uniform_into(design, rng, z);
      for (std::size_t t = 0; t < n_tests; ++t) {
        switch (kinds[t]) {
          case TestKind::d2: {
            evaluator->eval(z, d.data());
            const double q = d2_of(*ctx, d);
            pv[t][r] = ctx->df >= 1
                           ? chi2_sf(std::max(q, 0.0), ctx->df)
                           : kNan;
            break;
          }
          case TestKind::logistic: {
            const DevianceTest fit = tester->run(z);
            pv[t][r] = fit.p;
            separated[r] = fit.separation ? 1 : 0;
            break;
          }
          case TestKind::noclus: {
            for (std::size_t u = 0; u < unit_row.size(); ++u)
              z_units[u] = z[unit_row[u]];
            const NoclusResult nr = noclus_z_test(unit_x, z_units);
            pv[t][r] = nr.degenerate ? kNan : nr.p;
            break;
          }
          case TestKind::control:
            pv[t][r] = rng.uniform01();
            break;
        }
      }
    }
  });

  for (std::size_t t = 0; t < n_tests; ++t) {
    std::vector<double> sorted;
    sorted.reserve(n_reps);
    for (double p : pv[t])
      if (!std::isnan(p)) sorted.push_back(p);
    const std::uint64_t evaluated = sorted.size();
    std::sort(sorted.begin(), sorted.end());
    for (double level : spec.levels) {
      std::uint64_t rejected = 0;
      for (double p : sorted)
        if (p < level)
          ++rejected;
        else
          break;
      SizeRow row;
      row.test = test_names[t];
      row.nominal = level;
      row.rejected = rejected;
      row.evaluated = evaluated;
      row.actual = evaluated
                       ? static_cast<double>(rejected) /
                             static_cast<double>(evaluated)
                       : 0.0;
      row.stderr_est =
          evaluated
              ? std::sqrt(row.actual * (1.0 - row.actual) /
                          static_cast<double>(evaluated))
              : 0.0;
      result.rows.push_back(std::move(row));
    }
    result.p_values.push_back({test_names[t], std::move(sorted)});
  }
  for (std::uint8_t s : separated) result.separations += s;
  return result;
}

// --- power study -----------------------------------------------------------

double delta_hat(const Design& design, const std::vector<double>& x,
                 const Weights& w, double beta) {
  if (x.size() != design.n_clusters())
    throw InputError("delta_hat: covariate has " + std::to_string(x.size()) +
                     " values for " + std::to_string(design.n_clusters()) +
                     " clusters");
  double numerator = 0.0;
  for (std::size_t b = 0; b < design.blocks.size(); ++b) {
    const Block& block = design.blocks[b];
    numerator +=
        w.per_block[b] * block_variance(design, block, x) / block.m_bar;
  }
  const double var = variance_of_d(design, x, w);
  if (!(var > 0.0)) return 0.0;
  return beta * numerator / std::sqrt(var);
}

PowerStudyResult run_power_study(const PowerStudySpec& spec) {
  if (spec.replicates < 100)
    throw InputError("power studies need at least 100 replicates");
  if (spec.betas.empty())
    throw InputError("power studies need at least one beta");
  for (double beta : spec.betas)
    if (!std::isfinite(beta) || beta < 0.0)
      throw InputError("beta values must be finite and nonnegative");
  if (spec.weights.empty())
    throw InputError("power studies need at least one weight scheme");
  if (!std::isfinite(spec.z_star) || !(spec.z_star > 0.0))
    throw InputError("z_star must be a positive critical value");
  if (!(spec.target_delta_per_beta > 0.0))
    throw InputError("target_delta_per_beta must be positive");

  CovariateGen gen;
  gen.kind = CovariateGen::Kind::normal;
  gen.name = "x";
  const GeneratedStudyData data =
      generate_study_data(spec.blocks, spec.sizes, {gen}, spec.seed);
  const DesignBuild built = build_design(data.clusters);
  const Design& design = built.design;

  std::vector<double> x =
      select_rows(data.totals, built.kept_rows).column(0);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;

  const Weights w_star = block_weights(design, WeightKind::harmonic_star);
  const double delta_unit = delta_hat(design, x, w_star, 1.0);
  if (!(delta_unit > 0.0))
    throw DesignError(
        "the generated covariate carries no randomization variance; the "
        "power study cannot be scaled");
  const double scale = spec.target_delta_per_beta / delta_unit;
  for (double& v : x) v *= scale;

  CovariateMatrix xm;
  xm.names = {"x"};
  xm.n_rows = x.size();
  xm.values = x;

  struct Scheme {
    WeightKind kind;
    Weights w;
    double threshold = 0.0;  // z_star * sd of d under the uniform law
  };
  std::vector<Scheme> schemes;
  schemes.reserve(spec.weights.size());
  for (WeightKind kind : spec.weights) {
    Scheme s;
    s.kind = kind;
    s.w = block_weights(design, kind);
    s.threshold = spec.z_star * std::sqrt(std::max(
                      variance_of_d(design, x, s.w), 0.0));
    schemes.push_back(std::move(s));
  }

  PowerStudyResult result;
  result.x = x;
  result.replicates = spec.replicates;

  const std::uint64_t n_reps = spec.replicates;
  const std::size_t n_schemes = schemes.size();
  for (std::size_t bi = 0; bi < spec.betas.size(); ++bi) {
    const double beta = spec.betas[bi];
    BiasModel model;
    model.beta = beta;
    model.covariate = 0;
    const BiasSampler sampler(design, psi_values(xm, model), model);

    std::vector<std::uint8_t> rejected(n_schemes * n_reps, 0);
    parallel_chunks(n_reps, [&](unsigned, std::size_t begin,
                                std::size_t end) {
      std::vector<std::uint8_t> z(design.n_clusters());
      std::vector<DEvaluator> evaluators;
      evaluators.reserve(n_schemes);
      for (const Scheme& s : schemes)
        evaluators.emplace_back(design, xm, s.w);
      double d = 0.0;
      for (std::size_t r = begin; r < end; ++r) {
        Rng rng(spec.seed, StreamDomain::power_replicate,
                bi * n_reps + r);
        sampler.draw(rng, z);
        for (std::size_t s = 0; s < n_schemes; ++s) {
          evaluators[s].eval(z, &d);
          rejected[s * n_reps + r] = d > schemes[s].threshold ? 1 : 0;
        }
      }
    });

    for (std::size_t s = 0; s < n_schemes; ++s) {
      std::uint64_t hits = 0;
      for (std::uint64_t r = 0; r < n_reps; ++r)
        hits += rejected[s * n_reps + r];
      PowerRow row;
      row.weights = weight_name(schemes[s].kind);
      row.beta = beta;
      row.delta = delta_hat(design, x, schemes[s].w, beta);
      row.power_theory = normal_sf(spec.z_star - row.delta);
      row.power_mc =
          static_cast<double>(hits) / static_cast<double>(n_reps);
      row.stderr_est = std::sqrt(row.power_mc * (1.0 - row.power_mc) /
                                 static_cast<double>(n_reps));
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace randbal
