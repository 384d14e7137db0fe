#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "randbal/types.hpp"

namespace randbal {

struct AggregateResult {
  std::vector<ClusterRecord> clusters;  // sorted by (block_id, cluster_id)
  CovariateMatrix covariates;           // rows match `clusters`
};

// Rolls measurement units up to clusters: covariate totals by column-wise
// sum, size by member count. Rejects clusters whose units disagree on
// block or assignment, and non-finite covariate values, naming the
// offender. Every unit must carry exactly one value per covariate name.
AggregateResult aggregate_units(const std::vector<UnitRecord>& units,
                                const std::vector<std::string>& covariate_names);

struct DesignBuild {
  Design design;
  // For each design-order cluster, the index of its source record in the
  // caller's input vector; used to subset covariate rows after degenerate
  // blocks are dropped.
  std::vector<std::size_t> kept_rows;
};

// Groups clusters into blocks, fixing each block's treated count at the
// observed one. Blocks every assignment lands on the same side of
// (n_treated of 0 or n) carry no information and are excluded with a
// warning record; if nothing is left the design is unusable.
DesignBuild build_design(const std::vector<ClusterRecord>& clusters);

// Row subset in the given order (used with DesignBuild::kept_rows).
CovariateMatrix select_rows(const CovariateMatrix& x,
                            const std::vector<std::size_t>& rows);

// Covariate totals of cluster records as a matrix, rows in input order.
CovariateMatrix matrix_from_clusters(const std::vector<ClusterRecord>& clusters,
                                     std::vector<std::string> names);

// Appends all k(k+1)/2 pairwise products (squares included) to each
// unit's covariates. Interactions are formed per measurement unit and
// only then aggregated, so they are meaningful as cluster totals; asking
// for them on cluster-level input is rejected upstream.
void expand_interactions(std::vector<UnitRecord>& units,
                         std::vector<std::string>& names);

// The names the expansion appends, in the same order ("a*a", "a*b", ...).
std::vector<std::string> interaction_names(const std::vector<std::string>& names);

}  // namespace randbal
