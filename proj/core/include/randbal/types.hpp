#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace randbal {

// One measurement unit (a patient, a voter). Assignment happens at the
// cluster level, so every unit in a cluster shares block and assignment.
struct UnitRecord {
  std::string cluster_id;
  std::string block_id;
  int z = 0;  // 0 control, 1 treated
  std::vector<double> covariates;
};

// One assignment unit (a clinic, a household): covariate totals over its
// member units, its size in measurement units, and its observed assignment.
struct ClusterRecord {
  std::string cluster_id;
  std::string block_id;
  int z = 0;
  double m = 1.0;          // measurement units in the cluster, integer >= 1
  std::vector<double> x;   // covariate totals
};

// A stratum: a group of clusters of which exactly n_treated are assigned
// to treatment. h = n_treated * (1 - n_treated / n) measures how much
// randomness the block contributes; analyzed blocks always have h > 0.
struct Block {
  std::string block_id;
  std::vector<std::size_t> clusters;  // indices into design cluster order
  std::size_t n = 0;
  std::size_t n_treated = 0;
  double m_bar = 0.0;  // mean cluster size within the block
  double h = 0.0;
};

struct ExcludedBlock {
  std::string block_id;
  std::size_t n = 0;
  std::size_t n_treated = 0;
  std::string reason;
};

// The analyzed randomization design: blocks over a deterministic cluster
// ordering (lexicographic by block id, then cluster id), with degenerate
// blocks recorded separately. Immutable after construction; safe to share
// across threads.
struct Design {
  std::vector<Block> blocks;
  std::vector<std::string> cluster_ids;  // design order
  std::vector<std::size_t> block_index;  // block of each cluster
  std::vector<int> z_observed;
  std::vector<double> m;
  std::vector<ExcludedBlock> excluded;

  std::size_t n_clusters() const { return cluster_ids.size(); }
  std::size_t total_treated() const {
    std::size_t t = 0;
    for (const Block& b : blocks) t += b.n_treated;
    return t;
  }
};

// Named covariate columns of cluster totals, rows in design cluster order.
struct CovariateMatrix {
  std::vector<std::string> names;
  std::size_t n_rows = 0;
  std::vector<double> values;  // row-major, n_rows x names.size()

  std::size_t cols() const { return names.size(); }
  double at(std::size_t r, std::size_t c) const {
    return values[r * names.size() + c];
  }
  double& at(std::size_t r, std::size_t c) {
    return values[r * names.size() + c];
  }
  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) out[r] = at(r, c);
    return out;
  }
};

}  // namespace randbal
