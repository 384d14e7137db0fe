// Command-line front end: CSV in, JSON or CSV reports out, exit codes
// 0 (success), 1 (input error), 2 (design error). Output bytes are a pure
// function of (input bytes, flags, seed); human-facing notes go to stderr.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "randbal/assignment.hpp"
#include "randbal/balance.hpp"
#include "randbal/common.hpp"
#include "randbal/csv.hpp"
#include "randbal/data_model.hpp"
#include "randbal/experiments.hpp"
#include "randbal/omnibus.hpp"
#include "randbal/version.hpp"
#include "randbal/weights.hpp"

namespace {

using namespace randbal;

// --- JSON serialization ---------------------------------------------------

std::string json_quote(const std::string& s) {
  std::string out = "\"";
  char buf[8];
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

// Emits keys in call order with stable two-space indentation, so a report
// is byte-identical across runs. Non-finite numbers become null.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(const std::string& k) {
    item_prefix();
    out_ << json_quote(k) << ": ";
    after_key_ = true;
  }

  void string(const std::string& v) {
    item_prefix();
    out_ << json_quote(v);
  }
  void number(double v) {
    item_prefix();
    out_ << (std::isfinite(v) ? format_sig17(v) : "null");
  }
  void integer(std::uint64_t v) {
    item_prefix();
    out_ << v;
  }
  void integer(int v) {
    item_prefix();
    out_ << v;
  }
  void boolean(bool v) {
    item_prefix();
    out_ << (v ? "true" : "false");
  }
  void null() {
    item_prefix();
    out_ << "null";
  }

 private:
  void item_prefix() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (!depth_.empty()) {
      if (depth_.back()) out_ << ",";
      out_ << "\n" << std::string(2 * depth_.size(), ' ');
      depth_.back() = true;
    }
  }
  void open(char c) {
    item_prefix();
    out_ << c;
    depth_.push_back(false);
  }
  void close(char c) {
    const bool had_items = depth_.back();
    depth_.pop_back();
    if (had_items) out_ << "\n" << std::string(2 * depth_.size(), ' ');
    out_ << c;
  }

  std::ostream& out_;
  std::vector<bool> depth_;
  bool after_key_ = false;
};

// --- shared plumbing --------------------------------------------------------

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty()) {
    std::cout << bytes;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file '" + path + "'");
  out << bytes;
  if (!out.flush()) throw InputError("failed writing '" + path + "'");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct LoadedClusters {
  std::vector<ClusterRecord> clusters;
  CovariateMatrix totals;            // rows in cluster order
  std::vector<std::string> names;    // analyzed covariate names
};

LoadedClusters load_clusters(const RawTable& table, bool cluster_format,
                             bool covariates_given,
                             const std::string& covariates_raw,
                             bool interactions) {
  LoadedClusters out;
  out.names = covariates_given ? split_list(covariates_raw)
                               : covariate_columns(table, cluster_format);
  if (cluster_format) {
    if (interactions)
      throw InputError(
          "interaction expansion needs unit-format input; totals of products "
          "cannot be recovered from totals");
    out.clusters = clusters_from_table(table, out.names);
    out.totals = matrix_from_clusters(out.clusters, out.names);
  } else {
    auto units = units_from_table(table, out.names);
    if (interactions) expand_interactions(units, out.names);
    AggregateResult agg = aggregate_units(units, out.names);
    out.clusters = std::move(agg.clusters);
    out.totals = std::move(agg.covariates);
  }
  return out;
}

// Cluster size joins the analyzed covariates as the leading column: it is
// the total of the constant unit covariate, and imbalance in it is as real
// as in anything measured.
CovariateMatrix prepend_m(const Design& design, const CovariateMatrix& x) {
  CovariateMatrix out;
  out.names.reserve(x.cols() + 1);
  out.names.push_back("m");
  for (const std::string& n : x.names) out.names.push_back(n);
  out.n_rows = x.n_rows;
  out.values.resize(out.n_rows * out.names.size());
  for (std::size_t r = 0; r < out.n_rows; ++r) {
    out.at(r, 0) = design.m[r];
    for (std::size_t c = 0; c < x.cols(); ++c) out.at(r, c + 1) = x.at(r, c);
  }
  return out;
}

// --- balance ---------------------------------------------------------------

struct BalanceConfig {
  std::string input;
  std::string format = "cluster";
  std::string covariates_raw;
  bool covariates_given = false;
  std::string weights = "harmonic";
  std::string mode = "normal";
  std::uint64_t reps = 100'000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool interactions = false;
  std::string out;
};

void write_mid_p(JsonWriter& w, const MidPResult& r) {
  w.begin_object();
  w.key("value");
  w.number(r.value);
  w.key("stderr");
  w.number(r.stderr_est);
  w.key("replicates");
  w.integer(r.replicates);
  w.key("exact");
  w.boolean(r.exact);
  w.end_object();
}

int run_balance(const BalanceConfig& cfg) {
  if (cfg.mode == "mc" && !cfg.seed_given)
    throw InputError("Monte Carlo mode needs --seed for reproducible reports");

  const RawTable table = read_csv_file(cfg.input);
  const LoadedClusters loaded =
      load_clusters(table, cfg.format == "cluster", cfg.covariates_given,
                    cfg.covariates_raw, cfg.interactions);

  const DesignBuild built = build_design(loaded.clusters);
  const Design& design = built.design;
  const CovariateMatrix x =
      prepend_m(design, select_rows(loaded.totals, built.kept_rows));
  const std::vector<std::uint8_t> z = observed_assignment(design);
  const Weights w = block_weights(design, weight_kind_from_name(cfg.weights));
  const SpaceSize space = count_space(design);

  const OmnibusContext ctx = make_omnibus_context(design, x, w);
  const std::vector<double> d = d_vector(design, x, z, w);
  const OmnibusResult omnibus = compute_d2(ctx, d);

  std::optional<BatchMidP> mid;
  if (cfg.mode != "normal") {
    MidPOptions opt;
    opt.mode = cfg.mode == "exact" ? MidPMode::exact : MidPMode::monte_carlo;
    opt.replicates = cfg.reps;
    opt.seed = SeedSpec{cfg.seed};
    mid = mid_p_batch(design, x, z, w, opt, &ctx.pinv);
  }

  std::ostringstream json;
  JsonWriter jw(json);
  jw.begin_object();
  jw.key("tool");
  jw.string("randbal");
  jw.key("version");
  jw.string(library_version);
  jw.key("command");
  jw.string("balance");

  jw.key("config");
  jw.begin_object();
  jw.key("input");
  jw.string(cfg.input);
  jw.key("format");
  jw.string(cfg.format);
  jw.key("covariates");
  jw.begin_array();
  for (const std::string& n : loaded.names) jw.string(n);
  jw.end_array();
  jw.key("weights");
  jw.string(cfg.weights);
  jw.key("mode");
  jw.string(cfg.mode);
  if (cfg.mode == "mc") {
    jw.key("replicates");
    jw.integer(cfg.reps);
  }
  jw.key("seed");
  if (cfg.seed_given)
    jw.integer(cfg.seed);
  else
    jw.null();
  jw.key("interactions");
  jw.boolean(cfg.interactions);
  jw.end_object();

  jw.key("design");
  jw.begin_object();
  jw.key("n_clusters");
  jw.integer(static_cast<std::uint64_t>(design.n_clusters()));
  jw.key("n_blocks");
  jw.integer(static_cast<std::uint64_t>(design.blocks.size()));
  jw.key("total_treated");
  jw.integer(static_cast<std::uint64_t>(design.total_treated()));
  jw.key("n_tb_convention");
  jw.string("observed");
  jw.key("blocks");
  jw.begin_array();
  for (const Block& b : design.blocks) {
    jw.begin_object();
    jw.key("block_id");
    jw.string(b.block_id);
    jw.key("n");
    jw.integer(static_cast<std::uint64_t>(b.n));
    jw.key("n_t");
    jw.integer(static_cast<std::uint64_t>(b.n_treated));
    jw.key("m_bar");
    jw.number(b.m_bar);
    jw.key("h");
    jw.number(b.h);
    jw.end_object();
  }
  jw.end_array();
  jw.key("excluded_blocks");
  jw.begin_array();
  for (const ExcludedBlock& ex : design.excluded) {
    jw.begin_object();
    jw.key("block_id");
    jw.string(ex.block_id);
    jw.key("n");
    jw.integer(static_cast<std::uint64_t>(ex.n));
    jw.key("n_t");
    jw.integer(static_cast<std::uint64_t>(ex.n_treated));
    jw.key("reason");
    jw.string(ex.reason);
    jw.end_object();
  }
  jw.end_array();
  jw.end_object();

  jw.key("space");
  jw.begin_object();
  jw.key("huge");
  jw.boolean(space.huge);
  jw.key("count");
  if (space.huge)
    jw.null();
  else
    jw.integer(space.count);
  jw.key("log10_count");
  jw.number(space.log10_count);
  jw.end_object();

  jw.key("balance");
  jw.begin_array();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const std::vector<double> col = x.column(j);
    const double dj = d[j];
    const double var = ctx.cov(j, j);
    const ZP zp = z_and_normal_p(dj, var);
    const StdDiff sd = std_diff(design, col, z);
    jw.begin_object();
    jw.key("name");
    jw.string(x.names[j]);
    jw.key("d");
    jw.number(dj);
    jw.key("d_p");
    jw.number(compute_dp(design, col, z, w));
    jw.key("var_d");
    jw.number(var);
    jw.key("z_score");
    if (zp.degenerate)
      jw.null();
    else
      jw.number(zp.z);
    jw.key("p_normal");
    if (zp.degenerate)
      jw.null();
    else
      jw.number(zp.p);
    jw.key("std_diff");
    if (sd.degenerate)
      jw.null();
    else
      jw.number(sd.value);
    if (mid) {
      jw.key("mid_p");
      write_mid_p(jw, mid->covariate[j]);
    }
    jw.end_object();
  }
  jw.end_array();

  jw.key("omnibus");
  jw.begin_object();
  jw.key("d2");
  jw.number(omnibus.d2);
  jw.key("df");
  jw.integer(omnibus.df);
  jw.key("p_chi2");
  jw.number(omnibus.p_chi2);  // NaN prints as null
  jw.key("rank_tolerance");
  jw.number(omnibus.rank_tolerance);
  jw.key("degenerate");
  jw.boolean(omnibus.degenerate);
  if (mid && mid->has_quadratic) {
    jw.key("mid_p");
    write_mid_p(jw, mid->quadratic);
  }
  jw.end_object();

  jw.key("warnings");
  jw.begin_array();
  for (const ExcludedBlock& ex : design.excluded)
    jw.string("block '" + ex.block_id + "' excluded: " + ex.reason);
  jw.end_array();

  jw.end_object();
  json << "\n";
  write_output(cfg.out, json.str());

  std::cerr << design.n_clusters() << " clusters in " << design.blocks.size()
            << " block(s), " << design.total_treated() << " treated";
  if (!design.excluded.empty())
    std::cerr << " (" << design.excluded.size() << " block(s) excluded)";
  std::cerr << "\n";
  if (!omnibus.degenerate)
    std::cerr << "omnibus d2 = " << omnibus.d2 << " on " << omnibus.df
              << " df, p = " << omnibus.p_chi2 << "\n";
  return 0;
}

// --- design-compare ---------------------------------------------------------

struct CompareConfig {
  std::string input;
  std::string candidates_raw;
  std::string covariates_raw;
  bool covariates_given = false;
  std::uint64_t treated = 0;
  bool treated_given = false;
  std::string out;
};

int run_design_compare(const CompareConfig& cfg) {
  const RawTable table = read_csv_file(cfg.input);
  const std::vector<std::string> candidate_names = split_list(cfg.candidates_raw);
  if (candidate_names.empty())
    throw InputError("design-compare needs --candidates");
  // Catch a mistyped candidate before covariate parsing has a chance to
  // trip over some unrelated column and muddy the diagnosis.
  for (const std::string& name : candidate_names)
    if (name != "none" && !has_column(table, name))
      throw InputError("candidate column '" + name +
                       "' not found in the input");

  std::vector<std::string> cov_names;
  if (cfg.covariates_given) {
    cov_names = split_list(cfg.covariates_raw);
  } else {
    // Candidate label columns hold block names, not numbers; keep them out
    // of the default covariate selection.
    for (const std::string& n : covariate_columns(table, true))
      if (std::find(candidate_names.begin(), candidate_names.end(), n) ==
          candidate_names.end())
        cov_names.push_back(n);
  }
  std::vector<ClusterRecord> clusters = clusters_from_table(table, cov_names);

  // m leads the covariate columns here too.
  std::vector<std::string> names;
  names.push_back("m");
  for (const std::string& n : cov_names) names.push_back(n);
  for (ClusterRecord& rec : clusters) rec.x.insert(rec.x.begin(), rec.m);

  std::size_t total_treated = cfg.treated;
  if (!cfg.treated_given) {
    for (const ClusterRecord& rec : clusters)
      total_treated += rec.z == 1 ? 1 : 0;
    if (total_treated == 0)
      throw InputError(
          "no treated clusters in the input; pass --treated to set the total");
  }

  std::vector<Candidate> candidates;
  candidates.reserve(candidate_names.size());
  for (const std::string& name : candidate_names) {
    Candidate cand;
    cand.name = name;
    if (has_column(table, name)) {
      cand.labels = string_column(table, name);
    } else if (name == "none") {
      cand.labels.assign(clusters.size(), "all");
    } else {
      throw InputError("candidate column '" + name +
                       "' not found in the input");
    }
    candidates.push_back(std::move(cand));
  }

  const CompareResult result =
      compare_stratifications(clusters, names, candidates, total_treated);

  std::ostringstream csv;
  std::vector<std::string> header;
  header.push_back("candidate");
  for (const std::string& n : result.covariates) header.push_back(n);
  write_csv_row(csv, header);
  for (const CandidateRow& row : result.rows) {
    std::vector<std::string> fields;
    fields.push_back(row.candidate);
    for (double r : row.ratios) fields.push_back(format_sig17(r));
    write_csv_row(csv, fields);
  }
  write_output(cfg.out, csv.str());

  for (const CandidateRow& row : result.rows)
    for (const std::string& warning : row.warnings)
      std::cerr << "warning: candidate '" << row.candidate << "': " << warning
                << "\n";
  std::cerr << "note: ratios compare sd(d) under re-randomization against the "
               "spread of x_i / m_bar across analyzed clusters\n";
  return 0;
}

// --- study -------------------------------------------------------------------

struct StudyConfig {
  std::string spec_path;
  std::string out_prefix = "study";
};

void write_file_checked(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file '" + path + "'");
  out << bytes;
  if (!out.flush()) throw InputError("failed writing '" + path + "'");
}

int run_study(const StudyConfig& cfg) {
  const StudySpec parsed = parse_study_spec(slurp(cfg.spec_path));

  if (const auto* size = std::get_if<SizeStudySpec>(&parsed.spec)) {
    const SizeStudyResult res = run_size_study(*size);

    std::ostringstream table;
    write_csv_row(table, {"test", "nominal", "actual", "stderr", "rejected",
                          "evaluated"});
    for (const SizeRow& row : res.rows)
      write_csv_row(table,
                    {row.test, format_sig17(row.nominal),
                     format_sig17(row.actual), format_sig17(row.stderr_est),
                     std::to_string(row.rejected),
                     std::to_string(row.evaluated)});
    write_file_checked(cfg.out_prefix + "_size.csv", table.str());

    for (const TestPValues& tp : res.p_values) {
      std::ostringstream qq;
      write_csv_row(qq, {"rank", "uniform_quantile", "p_value"});
      const double n = static_cast<double>(tp.sorted_p.size());
      for (std::size_t i = 0; i < tp.sorted_p.size(); ++i)
        write_csv_row(qq, {std::to_string(i + 1),
                           format_sig17((static_cast<double>(i) + 0.5) / n),
                           format_sig17(tp.sorted_p[i])});
      write_file_checked(cfg.out_prefix + "_pvalues_" + tp.test + ".csv",
                         qq.str());
    }

    std::cout << "size study: " << res.replicates << " replicates\n";
    if (res.d2_df >= 0) std::cout << "d2 df: " << res.d2_df << "\n";
    if (res.logistic_df >= 0)
      std::cout << "logistic df: " << res.logistic_df
                << ", separations: " << res.separations << "\n";
    for (const SizeRow& row : res.rows)
      std::cout << row.test << " at " << format_sig17(row.nominal) << ": "
                << format_sig17(row.actual) << " (se "
                << format_sig17(row.stderr_est) << ")\n";
    std::cout << "wrote " << cfg.out_prefix << "_size.csv and "
              << res.p_values.size() << " p-value file(s)\n";
    return 0;
  }

  const auto& power = std::get<PowerStudySpec>(parsed.spec);
  const PowerStudyResult res = run_power_study(power);

  std::ostringstream table;
  write_csv_row(table, {"weights", "beta", "delta", "power_theory", "power_mc",
                        "stderr"});
  for (const PowerRow& row : res.rows)
    write_csv_row(table,
                  {row.weights, format_sig17(row.beta), format_sig17(row.delta),
                   format_sig17(row.power_theory), format_sig17(row.power_mc),
                   format_sig17(row.stderr_est)});
  write_file_checked(cfg.out_prefix + "_power.csv", table.str());

  std::cout << "power study: " << res.replicates << " replicates\n";
  for (const PowerRow& row : res.rows)
    std::cout << row.weights << " at beta " << format_sig17(row.beta) << ": "
              << format_sig17(row.power_mc) << " (theory "
              << format_sig17(row.power_theory) << ", se "
              << format_sig17(row.stderr_est) << ")\n";
  std::cout << "wrote " << cfg.out_prefix << "_power.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covariate balance tests for randomized studies"};
  app.require_subcommand(1);

  BalanceConfig balance;
  CLI::App* cmd_balance =
      app.add_subcommand("balance", "balance report for one randomization");
  cmd_balance->add_option("--input", balance.input, "input CSV path")
      ->required();
  cmd_balance->add_option("--format", balance.format, "input rows (default cluster)")
      ->check(CLI::IsMember({"unit", "cluster"}));
  auto* cov_opt = cmd_balance->add_option(
      "--covariates", balance.covariates_raw,
      "comma-separated covariate columns (default: all non-required columns; "
      "empty string tests cluster size alone)");
  cov_opt->expected(0, 1);
  cmd_balance->add_option("--weights", balance.weights, "block weighting (default harmonic)")
      ->check(CLI::IsMember({"harmonic", "equal", "block-size", "treated-size"}));
  cmd_balance->add_option("--mode", balance.mode,
                          "p-value mode: normal approximation, exact "
                          "enumeration, or Monte Carlo (default normal)")
      ->check(CLI::IsMember({"normal", "exact", "mc"}));
  cmd_balance->add_option("--reps", balance.reps, "Monte Carlo replicates (default 100000)");
  auto* seed_opt = cmd_balance->add_option("--seed", balance.seed, "master seed (required for --mode mc)");
  cmd_balance->add_flag("--interactions", balance.interactions,
                        "expand pairwise covariate products (unit input only)");
  cmd_balance->add_option("--out", balance.out, "write the JSON report here (default stdout)");

  CompareConfig compare;
  CLI::App* cmd_compare = app.add_subcommand(
      "design-compare", "score candidate stratifications of the same clusters");
  cmd_compare->add_option("--input", compare.input, "cluster CSV path")
      ->required();
  cmd_compare->add_option("--candidates", compare.candidates_raw,
                          "comma-separated candidate block-label columns; the "
                          "name 'none' (if no such column exists) means a "
                          "single block")
      ->required();
  auto* cmp_cov_opt = cmd_compare->add_option(
      "--covariates", compare.covariates_raw,
      "comma-separated covariate columns (default: all non-required, "
      "non-candidate columns)");
  cmp_cov_opt->expected(0, 1);
  auto* treated_opt = cmd_compare->add_option(
      "--treated", compare.treated,
      "total treated clusters to split across blocks (default: observed)");
  cmd_compare->add_option("--out", compare.out, "write the CSV table here (default stdout)");

  StudyConfig study;
  CLI::App* cmd_study =
      app.add_subcommand("study", "run a simulation study from a JSON spec");
  cmd_study->add_option("--spec", study.spec_path, "JSON study spec path")
      ->required();
  cmd_study->add_option("--out", study.out_prefix,
                        "output file prefix (default 'study')");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  balance.covariates_given = cov_opt->count() > 0;
  balance.seed_given = seed_opt->count() > 0;
  compare.covariates_given = cmp_cov_opt->count() > 0;
  compare.treated_given = treated_opt->count() > 0;

  try {
    if (cmd_balance->parsed()) return run_balance(balance);
    if (cmd_compare->parsed()) return run_design_compare(compare);
    return run_study(study);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DesignError& e) {
    std::cerr << "design error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
