#include "randbal/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "randbal/common.hpp"

namespace randbal {

AggregateResult aggregate_units(const std::vector<UnitRecord>& units,
                                const std::vector<std::string>& covariate_names) {
  const std::size_t k = covariate_names.size();

  std::map<std::string, std::size_t> slot;  // cluster_id -> cluster index
  std::vector<ClusterRecord> clusters;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const UnitRecord& unit = units[u];
    if (unit.covariates.size() != k) {
      throw InputError("unit " + std::to_string(u + 1) + " (cluster '" +
                       unit.cluster_id + "'): expected " + std::to_string(k) +
                       " covariate values, got " +
                       std::to_string(unit.covariates.size()));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!std::isfinite(unit.covariates[c])) {
        throw InputError("unit " + std::to_string(u + 1) + " (cluster '" +
                         unit.cluster_id + "'): covariate '" +
                         covariate_names[c] + "' is not finite");
      }
    }
    if (unit.z != 0 && unit.z != 1) {
      throw InputError("unit " + std::to_string(u + 1) + " (cluster '" +
                       unit.cluster_id + "'): assignment must be 0 or 1");
    }

    auto [it, inserted] = slot.try_emplace(unit.cluster_id, clusters.size());
    if (inserted) {
      ClusterRecord rec;
      rec.cluster_id = unit.cluster_id;
      rec.block_id = unit.block_id;
      rec.z = unit.z;
      rec.m = 0.0;
      rec.x.assign(k, 0.0);
      clusters.push_back(std::move(rec));
    }
    ClusterRecord& rec = clusters[it->second];
    if (rec.block_id != unit.block_id) {
      throw InputError("cluster '" + unit.cluster_id +
                       "': units disagree on block ('" + rec.block_id +
                       "' vs '" + unit.block_id + "')");
    }
    if (rec.z != unit.z) {
      throw InputError("cluster '" + unit.cluster_id +
                       "': units disagree on assignment");
    }
    rec.m += 1.0;
    for (std::size_t c = 0; c < k; ++c) rec.x[c] += unit.covariates[c];
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const ClusterRecord& a, const ClusterRecord& b) {
              if (a.block_id != b.block_id) return a.block_id < b.block_id;
              return a.cluster_id < b.cluster_id;
            });

  AggregateResult out;
  out.covariates = matrix_from_clusters(clusters, covariate_names);
  out.clusters = std::move(clusters);
  return out;
}

DesignBuild build_design(const std::vector<ClusterRecord>& clusters) {
  if (clusters.empty()) throw InputError("no clusters supplied");

  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&clusters](std::size_t a, std::size_t b) {
                     const ClusterRecord& ca = clusters[a];
                     const ClusterRecord& cb = clusters[b];
                     if (ca.block_id != cb.block_id)
                       return ca.block_id < cb.block_id;
                     return ca.cluster_id < cb.cluster_id;
                   });

  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    const ClusterRecord& a = clusters[order[i]];
    const ClusterRecord& b = clusters[order[i + 1]];
    if (a.block_id == b.block_id && a.cluster_id == b.cluster_id) {
      throw InputError("duplicate cluster '" + a.cluster_id + "' in block '" +
                       a.block_id + "'");
    }
  }

  for (const ClusterRecord& c : clusters) {
    if (c.z != 0 && c.z != 1) {
      throw InputError("cluster '" + c.cluster_id +
                       "': assignment must be 0 or 1");
    }
    if (!(c.m >= 1.0) || c.m != std::floor(c.m)) {
      throw InputError("cluster '" + c.cluster_id +
                       "': size m must be an integer >= 1");
    }
    for (double v : c.x) {
      if (!std::isfinite(v)) {
        throw InputError("cluster '" + c.cluster_id +
                         "': non-finite covariate total");
      }
    }
  }

  DesignBuild out;
  Design& design = out.design;

  std::size_t lo = 0;
  while (lo < order.size()) {
    std::size_t hi = lo;
    const std::string& block_id = clusters[order[lo]].block_id;
    while (hi < order.size() && clusters[order[hi]].block_id == block_id) ++hi;

    const std::size_t n = hi - lo;
    std::size_t n_treated = 0;
    double m_total = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      n_treated += static_cast<std::size_t>(clusters[order[i]].z);
      m_total += clusters[order[i]].m;
    }

    if (n_treated == 0 || n_treated == n) {
      design.excluded.push_back(
          {block_id, n, n_treated,
           n_treated == 0 ? "no treated clusters" : "no control clusters"});
      lo = hi;
      continue;
    }

    Block block;
    block.block_id = block_id;
    block.n = n;
    block.n_treated = n_treated;
    block.m_bar = m_total / static_cast<double>(n);
    block.h = static_cast<double>(n_treated) *
              (1.0 - static_cast<double>(n_treated) / static_cast<double>(n));
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t src = order[i];
      block.clusters.push_back(design.cluster_ids.size());
      design.cluster_ids.push_back(clusters[src].cluster_id);
      design.block_index.push_back(design.blocks.size());
      design.z_observed.push_back(clusters[src].z);
      design.m.push_back(clusters[src].m);
      out.kept_rows.push_back(src);
    }
    design.blocks.push_back(std::move(block));
    lo = hi;
  }

  if (design.blocks.empty()) {
    throw DesignError("no analyzable blocks: every block has all clusters "
                      "on one side of the assignment");
  }
  return out;
}

CovariateMatrix select_rows(const CovariateMatrix& x,
                            const std::vector<std::size_t>& rows) {
  CovariateMatrix out;
  out.names = x.names;
  out.n_rows = rows.size();
  out.values.reserve(rows.size() * x.cols());
  for (const std::size_t r : rows)
    for (std::size_t c = 0; c < x.cols(); ++c) out.values.push_back(x.at(r, c));
  return out;
}

CovariateMatrix matrix_from_clusters(const std::vector<ClusterRecord>& clusters,
                                     std::vector<std::string> names) {
  const std::size_t k = names.size();
  CovariateMatrix out;
  out.names = std::move(names);
  out.n_rows = clusters.size();
  out.values.reserve(clusters.size() * k);
  for (const ClusterRecord& c : clusters) {
    if (c.x.size() != k) {
      throw InputError("cluster '" + c.cluster_id + "': expected " +
                       std::to_string(k) + " covariate totals, got " +
                       std::to_string(c.x.size()));
    }
    out.values.insert(out.values.end(), c.x.begin(), c.x.end());
  }
  return out;
}

std::vector<std::string> interaction_names(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  out.reserve(names.size() * (names.size() + 1) / 2);
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i; j < names.size(); ++j)
      out.push_back(names[i] + "*" + names[j]);
  return out;
}

void expand_interactions(std::vector<UnitRecord>& units,
                         std::vector<std::string>& names) {
  const std::size_t k = names.size();
  for (UnitRecord& unit : units) {
    if (unit.covariates.size() != k) {
      throw InputError("cluster '" + unit.cluster_id +
                       "': covariate count does not match names");
    }
    unit.covariates.reserve(k + k * (k + 1) / 2);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i; j < k; ++j)
        unit.covariates.push_back(unit.covariates[i] * unit.covariates[j]);
  }
  const std::vector<std::string> added = interaction_names(names);
  names.insert(names.end(), added.begin(), added.end());
}

}  // namespace randbal
