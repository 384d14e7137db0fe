#include "randbal/weights.hpp"

#include <cmath>

#include "randbal/common.hpp"

namespace randbal {
namespace {

Weights normalized(WeightKind kind, std::vector<double> raw) {
  double total = 0;
  for (double w : raw) total += w;
  if (!(total > 0))
    throw InputError("block weights must have a positive sum");
  for (double& w : raw) w /= total;
  return Weights{kind, std::move(raw)};
}

}  // namespace

Weights block_weights(const Design& design, WeightKind kind) {
  if (kind == WeightKind::custom)
    throw InputError("custom weights need explicit per-block values");
  std::vector<double> raw;
  raw.reserve(design.blocks.size());
  for (const Block& b : design.blocks) {
    switch (kind) {
      case WeightKind::harmonic_star:
        raw.push_back(b.h * b.m_bar);
        break;
      case WeightKind::block_size: {
        double units = 0;
        for (std::size_t c : b.clusters) units += design.m[c];
        raw.push_back(units);
        break;
      }
      case WeightKind::treated_size:
        raw.push_back(static_cast<double>(b.n_treated) * b.m_bar);
        break;
      case WeightKind::equal:
        raw.push_back(1.0);
        break;
      case WeightKind::custom:
        break;  // unreachable
    }
  }
  return normalized(kind, std::move(raw));
}

Weights custom_weights(const Design& design, std::vector<double> raw) {
  if (raw.size() != design.blocks.size())
    throw InputError("need one weight per analyzed block (" +
                     std::to_string(design.blocks.size()) + "), got " +
                     std::to_string(raw.size()));
  for (std::size_t b = 0; b < raw.size(); ++b) {
    if (!std::isfinite(raw[b]) || raw[b] < 0)
      throw InputError("weight for block '" + design.blocks[b].block_id +
                       "' must be finite and nonnegative");
  }
  return normalized(WeightKind::custom, std::move(raw));
}

WeightKind weight_kind_from_name(const std::string& name) {
  if (name == "harmonic") return WeightKind::harmonic_star;
  if (name == "block-size") return WeightKind::block_size;
  if (name == "treated-size") return WeightKind::treated_size;
  if (name == "equal") return WeightKind::equal;
  throw InputError("unknown weight scheme '" + name +
                   "'; expected harmonic, block-size, treated-size, or equal");
}

std::string weight_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::harmonic_star:
      return "harmonic";
    case WeightKind::block_size:
      return "block-size";
    case WeightKind::treated_size:
      return "treated-size";
    case WeightKind::equal:
      return "equal";
    case WeightKind::custom:
      return "custom";
  }
  return "unknown";
}

}  // namespace randbal
