#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "randbal/common.hpp"
#include "randbal/experiments.hpp"

namespace randbal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError("study spec: " + (where.empty() ? "/" : where) + ": " +
                   what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known) fail(where + "/" + item.key(), "unknown field");
  }
}

const json& require(const json& obj, const std::string& where,
                    const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where + "/" + key, "required field is missing");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "expected a finite number");
  return d;
}

std::uint64_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.is_number_float() ||
      (v.is_number_integer() && v.get<std::int64_t>() < 0))
    fail(where, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

const json& as_object(const json& v, const std::string& where) {
  if (!v.is_object()) fail(where, "expected an object");
  return v;
}

const json& as_array(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  return v;
}

WeightKind as_weights(const json& v, const std::string& where) {
  const std::string name = as_string(v, where);
  try {
    return weight_kind_from_name(name);
  } catch (const InputError& e) {
    fail(where, e.what());
  }
}

std::vector<BlockSpec> parse_blocks(const json& v, const std::string& where) {
  const json& arr = as_array(v, where);
  if (arr.empty()) fail(where, "needs at least one block");
  std::vector<BlockSpec> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string here = where + "/" + std::to_string(i);
    const json& obj = as_object(arr[i], here);
    check_keys(obj, here, {"n", "treated", "repeat"});
    BlockSpec b;
    b.n = as_count(require(obj, here, "n"), here + "/n");
    b.n_treated = as_count(require(obj, here, "treated"), here + "/treated");
    if (obj.contains("repeat"))
      b.repeat = as_count(obj["repeat"], here + "/repeat");
    if (b.n < 2) fail(here + "/n", "blocks need at least two clusters");
    if (b.n_treated < 1 || b.n_treated >= b.n)
      fail(here + "/treated", "treated count must lie in [1, n-1]");
    if (b.repeat < 1) fail(here + "/repeat", "repeat must be at least 1");
    out.push_back(b);
  }
  return out;
}

ClusterSizeGen parse_sizes(const json& v, const std::string& where) {
  const json& obj = as_object(v, where);
  const std::string kind = as_string(require(obj, where, "kind"),
                                     where + "/kind");
  ClusterSizeGen g;
  if (kind == "fixed") {
    check_keys(obj, where, {"kind", "value"});
    g.kind = ClusterSizeGen::Kind::fixed;
    g.value = static_cast<double>(
        as_count(require(obj, where, "value"), where + "/value"));
    if (g.value < 1.0) fail(where + "/value", "cluster sizes start at 1");
  } else if (kind == "uniform") {
    check_keys(obj, where, {"kind", "lo", "hi"});
    g.kind = ClusterSizeGen::Kind::uniform_int;
    g.lo = as_count(require(obj, where, "lo"), where + "/lo");
    g.hi = as_count(require(obj, where, "hi"), where + "/hi");
    if (g.lo < 1) fail(where + "/lo", "cluster sizes start at 1");
    if (g.hi < g.lo) fail(where + "/hi", "hi must be at least lo");
  } else if (kind == "lognormal") {
    check_keys(obj, where, {"kind", "log_mean", "log_sd", "min"});
    g.kind = ClusterSizeGen::Kind::lognormal_int;
    g.log_mean = as_number(require(obj, where, "log_mean"),
                           where + "/log_mean");
    g.log_sd = as_number(require(obj, where, "log_sd"), where + "/log_sd");
    if (g.log_sd < 0.0) fail(where + "/log_sd", "log_sd must be nonnegative");
    if (obj.contains("min")) g.min = as_count(obj["min"], where + "/min");
    if (g.min < 1) fail(where + "/min", "cluster sizes start at 1");
  } else {
    fail(where + "/kind", "expected \"fixed\", \"uniform\", or \"lognormal\"");
  }
  return g;
}

std::vector<CovariateGen> parse_covariates(const json& v,
                                           const std::string& where) {
  const json& arr = as_array(v, where);
  std::vector<CovariateGen> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string here = where + "/" + std::to_string(i);
    const json& obj = as_object(arr[i], here);
    const std::string kind = as_string(require(obj, here, "kind"),
                                       here + "/kind");
    CovariateGen g;
    g.name = as_string(require(obj, here, "name"), here + "/name");
    if (g.name.empty()) fail(here + "/name", "names cannot be empty");
    for (const CovariateGen& prev : out)
      if (prev.name == g.name) fail(here + "/name", "duplicate name");
    if (kind == "normal") {
      check_keys(obj, here, {"kind", "name"});
      g.kind = CovariateGen::Kind::normal;
    } else if (kind == "lognormal") {
      check_keys(obj, here, {"kind", "name", "sigma"});
      g.kind = CovariateGen::Kind::lognormal;
      if (obj.contains("sigma"))
        g.sigma = as_number(obj["sigma"], here + "/sigma");
      if (!(g.sigma > 0.0)) fail(here + "/sigma", "sigma must be positive");
    } else if (kind == "bernoulli") {
      check_keys(obj, here, {"kind", "name", "p"});
      g.kind = CovariateGen::Kind::bernoulli;
      g.p = as_number(require(obj, here, "p"), here + "/p");
      if (!(g.p > 0.0 && g.p < 1.0))
        fail(here + "/p", "p must lie strictly inside (0, 1)");
    } else if (kind == "binomial-rate") {
      check_keys(obj, here, {"kind", "name", "alpha", "beta"});
      g.kind = CovariateGen::Kind::binomial_rate;
      if (obj.contains("alpha"))
        g.rate_alpha = as_number(obj["alpha"], here + "/alpha");
      if (obj.contains("beta"))
        g.rate_beta = as_number(obj["beta"], here + "/beta");
      if (!(g.rate_alpha > 0.0))
        fail(here + "/alpha", "alpha must be positive");
      if (!(g.rate_beta > 0.0)) fail(here + "/beta", "beta must be positive");
    } else if (kind == "categorical") {
      check_keys(obj, here, {"kind", "name", "levels", "zipf"});
      g.kind = CovariateGen::Kind::categorical;
      g.levels = as_count(require(obj, here, "levels"), here + "/levels");
      if (g.levels < 2) fail(here + "/levels", "needs at least two levels");
      if (obj.contains("zipf")) g.zipf = as_number(obj["zipf"], here + "/zipf");
      if (g.zipf < 0.0) fail(here + "/zipf", "zipf must be nonnegative");
    } else {
      fail(here + "/kind",
           "expected \"normal\", \"lognormal\", \"bernoulli\", "
           "\"binomial-rate\", or \"categorical\"");
    }
    out.push_back(std::move(g));
  }
  return out;
}

SizeStudySpec parse_size_spec(const json& root) {
  check_keys(root, "", {"type", "replicates", "seed", "levels", "tests",
                        "weights", "blocks", "sizes", "covariates"});
  SizeStudySpec spec;
  spec.replicates = as_count(require(root, "", "replicates"), "/replicates");
  if (spec.replicates < 10'000)
    fail("/replicates", "size studies need at least 10000 replicates");
  if (root.contains("seed"))
    spec.seed.master = as_count(root["seed"], "/seed");

  if (root.contains("levels")) {
    const json& levels = as_array(root["levels"], "/levels");
    if (levels.empty()) fail("/levels", "needs at least one nominal level");
    spec.levels.clear();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const std::string here = "/levels/" + std::to_string(i);
      const double a = as_number(levels[i], here);
      if (!(a > 0.0 && a < 1.0))
        fail(here, "nominal levels must lie strictly inside (0, 1)");
      spec.levels.push_back(a);
    }
  }

  if (root.contains("tests")) {
    const json& tests = as_array(root["tests"], "/tests");
    if (tests.empty()) fail("/tests", "needs at least one test");
    spec.tests.clear();
    for (std::size_t i = 0; i < tests.size(); ++i) {
      const std::string here = "/tests/" + std::to_string(i);
      const std::string name = as_string(tests[i], here);
      if (name != "d2" && name != "logistic" && name != "noclus" &&
          name != "control")
        fail(here,
             "expected \"d2\", \"logistic\", \"noclus\", or \"control\"");
      spec.tests.push_back(name);
    }
  }

  if (root.contains("weights"))
    spec.weights = as_weights(root["weights"], "/weights");
  spec.blocks = parse_blocks(require(root, "", "blocks"), "/blocks");
  spec.sizes = parse_sizes(require(root, "", "sizes"), "/sizes");
  if (root.contains("covariates"))
    spec.covariates = parse_covariates(root["covariates"], "/covariates");
  return spec;
}

PowerStudySpec parse_power_spec(const json& root) {
  check_keys(root, "", {"type", "replicates", "seed", "z_star", "betas",
                        "weights", "blocks", "sizes",
                        "target_delta_per_beta"});
  PowerStudySpec spec;
  spec.replicates = as_count(require(root, "", "replicates"), "/replicates");
  if (spec.replicates < 100)
    fail("/replicates", "power studies need at least 100 replicates");
  if (root.contains("seed"))
    spec.seed.master = as_count(root["seed"], "/seed");
  if (root.contains("z_star"))
    spec.z_star = as_number(root["z_star"], "/z_star");
  if (!(spec.z_star > 0.0)) fail("/z_star", "z_star must be positive");

  if (root.contains("betas")) {
    const json& betas = as_array(root["betas"], "/betas");
    if (betas.empty()) fail("/betas", "needs at least one beta");
    spec.betas.clear();
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const std::string here = "/betas/" + std::to_string(i);
      const double b = as_number(betas[i], here);
      if (b < 0.0) fail(here, "beta values must be nonnegative");
      spec.betas.push_back(b);
    }
  }

  if (root.contains("weights")) {
    const json& ws = as_array(root["weights"], "/weights");
    if (ws.empty()) fail("/weights", "needs at least one weight scheme");
    spec.weights.clear();
    for (std::size_t i = 0; i < ws.size(); ++i)
      spec.weights.push_back(
          as_weights(ws[i], "/weights/" + std::to_string(i)));
  }
  spec.blocks = parse_blocks(require(root, "", "blocks"), "/blocks");
  spec.sizes = parse_sizes(require(root, "", "sizes"), "/sizes");
  if (root.contains("target_delta_per_beta")) {
    spec.target_delta_per_beta =
        as_number(root["target_delta_per_beta"], "/target_delta_per_beta");
    if (!(spec.target_delta_per_beta > 0.0))
      fail("/target_delta_per_beta", "must be positive");
  }
  return spec;
}

}  // namespace

StudySpec parse_study_spec(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("study spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("", "expected a JSON object");
  const std::string type = as_string(require(root, "", "type"), "/type");
  if (type == "size") return StudySpec{parse_size_spec(root)};
  if (type == "power") return StudySpec{parse_power_spec(root)};
  fail("/type", "expected \"size\" or \"power\"");
}

}  // namespace randbal
