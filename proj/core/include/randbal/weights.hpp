#pragma once

#include <string>
#include <vector>

#include "randbal/types.hpp"

namespace randbal {

// How block-level treated-minus-control differences are pooled into one
// statistic. harmonic_star weights a block by h_b * m_bar_b, which
// maximizes power against the local alternatives the normal approximation
// targets; the others are conventional choices kept for comparison.
enum class WeightKind {
  harmonic_star,
  block_size,
  treated_size,
  equal,
  custom,
};

struct Weights {
  WeightKind kind = WeightKind::harmonic_star;
  std::vector<double> per_block;  // normalized to sum to 1
};

Weights block_weights(const Design& design, WeightKind kind);

// Caller-supplied raw weights, one per analyzed block; must be finite,
// nonnegative, with a positive sum. Normalized like the named kinds.
Weights custom_weights(const Design& design, std::vector<double> raw);

// CLI token round trip: "harmonic", "block-size", "treated-size", "equal".
WeightKind weight_kind_from_name(const std::string& name);
std::string weight_name(WeightKind kind);

}  // namespace randbal
