#include "randbal/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "randbal/common.hpp"

namespace randbal {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t row,
                       const std::string& what) {
  throw InputError(source + " row " + std::to_string(row) + ": " + what);
}

double parse_double(const RawTable& t, std::size_t row_index,
                    std::size_t col_index, const std::string& role,
                    const std::string& context) {
  const std::string& field = t.rows[row_index][col_index];
  // Reported row numbers are 1-based including the header line.
  const std::size_t row_no = row_index + 2;
  if (field.empty()) {
    fail(t.source, row_no, "missing value for " + role + context);
  }
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    fail(t.source, row_no,
         "cannot parse '" + field + "' as a number for " + role + context);
  }
  if (!std::isfinite(value)) {
    fail(t.source, row_no, "non-finite value for " + role + context);
  }
  return value;
}

int parse_assignment(const RawTable& t, std::size_t row_index,
                     std::size_t col_index) {
  const std::string& field = t.rows[row_index][col_index];
  if (field == "0") return 0;
  if (field == "1") return 1;
  fail(t.source, row_index + 2,
       "assignment z must be 0 or 1, got '" + field + "'");
}

const std::vector<std::string>& required_columns(bool cluster_format) {
  static const std::vector<std::string> unit = {"cluster_id", "block_id", "z"};
  static const std::vector<std::string> cluster = {"cluster_id", "block_id",
                                                   "z", "m"};
  return cluster_format ? cluster : unit;
}

}  // namespace

RawTable read_csv(std::istream& in, const std::string& source_name) {
  RawTable t;
  t.source = source_name;

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  enum class State { field_start, unquoted, quoted, quote_in_quoted };
  State state = State::field_start;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  char ch;
  while (in.get(ch)) {
    if (ch == '\r') {
      // Tolerate CRLF by dropping the CR when a LF follows; a bare CR in
      // quoted content is kept.
      if (state == State::quoted) {
        field.push_back(ch);
      } else if (in.peek() != '\n') {
        fail(source_name, line, "stray carriage return");
      }
      continue;
    }
    switch (state) {
      case State::field_start:
        if (ch == '"') {
          state = State::quoted;
        } else if (ch == ',') {
          end_field();
        } else if (ch == '\n') {
          end_record();
          ++line;
        } else {
          field.push_back(ch);
          state = State::unquoted;
        }
        break;
      case State::unquoted:
        if (ch == ',') {
          end_field();
          state = State::field_start;
        } else if (ch == '\n') {
          end_record();
          ++line;
          state = State::field_start;
        } else if (ch == '"') {
          fail(source_name, line, "unexpected quote inside unquoted field");
        } else {
          field.push_back(ch);
        }
        break;
      case State::quoted:
        if (ch == '"') {
          state = State::quote_in_quoted;
        } else {
          field.push_back(ch);
          if (ch == '\n') ++line;
        }
        break;
      case State::quote_in_quoted:
        if (ch == '"') {
          field.push_back('"');
          state = State::quoted;
        } else if (ch == ',') {
          end_field();
          state = State::field_start;
        } else if (ch == '\n') {
          end_record();
          ++line;
          state = State::field_start;
        } else {
          fail(source_name, line, "unexpected character after closing quote");
        }
        break;
    }
  }
  if (state == State::quoted) {
    fail(source_name, line, "unterminated quoted field");
  }
  if (state != State::field_start || !field.empty() || !record.empty()) {
    end_record();  // final record without trailing newline
  }

  if (records.empty()) throw InputError(source_name + ": empty file");
  t.header = std::move(records.front());

  std::set<std::string> seen;
  for (const std::string& name : t.header) {
    if (name.empty()) throw InputError(source_name + ": empty column name");
    if (!seen.insert(name).second) {
      throw InputError(source_name + ": duplicate column '" + name + "'");
    }
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;  // blank line
    if (records[r].size() != t.header.size()) {
      fail(source_name, r + 1,
           "expected " + std::to_string(t.header.size()) + " fields, got " +
               std::to_string(records[r].size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  if (t.rows.empty()) throw InputError(source_name + ": no data rows");
  return t;
}

RawTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file '" + path + "'");
  return read_csv(in, path);
}

std::size_t find_column(const RawTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) {
    throw InputError(t.source + ": required column '" + name + "' not found");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

bool has_column(const RawTable& t, const std::string& name) {
  return std::find(t.header.begin(), t.header.end(), name) != t.header.end();
}

std::vector<UnitRecord> units_from_table(
    const RawTable& t, const std::vector<std::string>& covariate_names) {
  const std::size_t c_cluster = find_column(t, "cluster_id");
  const std::size_t c_block = find_column(t, "block_id");
  const std::size_t c_z = find_column(t, "z");
  std::vector<std::size_t> c_cov;
  c_cov.reserve(covariate_names.size());
  for (const std::string& name : covariate_names) c_cov.push_back(find_column(t, name));

  std::vector<UnitRecord> units;
  units.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    UnitRecord u;
    u.cluster_id = t.rows[r][c_cluster];
    u.block_id = t.rows[r][c_block];
    if (u.cluster_id.empty()) fail(t.source, r + 2, "empty cluster_id");
    u.z = parse_assignment(t, r, c_z);
    u.covariates.reserve(covariate_names.size());
    for (std::size_t j = 0; j < c_cov.size(); ++j) {
      u.covariates.push_back(
          parse_double(t, r, c_cov[j], "covariate '" + covariate_names[j] + "'",
                       " (cluster '" + u.cluster_id + "')"));
    }
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<ClusterRecord> clusters_from_table(
    const RawTable& t, const std::vector<std::string>& covariate_names) {
  const std::size_t c_cluster = find_column(t, "cluster_id");
  const std::size_t c_block = find_column(t, "block_id");
  const std::size_t c_z = find_column(t, "z");
  const std::size_t c_m = find_column(t, "m");
  std::vector<std::size_t> c_cov;
  c_cov.reserve(covariate_names.size());
  for (const std::string& name : covariate_names) c_cov.push_back(find_column(t, name));

  std::vector<ClusterRecord> clusters;
  clusters.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    ClusterRecord c;
    c.cluster_id = t.rows[r][c_cluster];
    c.block_id = t.rows[r][c_block];
    if (c.cluster_id.empty()) fail(t.source, r + 2, "empty cluster_id");
    c.z = parse_assignment(t, r, c_z);
    c.m = parse_double(t, r, c_m, "cluster size 'm'",
                       " (cluster '" + c.cluster_id + "')");
    if (!(c.m >= 1.0) || c.m != std::floor(c.m)) {
      fail(t.source, r + 2, "cluster size m must be an integer >= 1 (cluster '" +
                                c.cluster_id + "')");
    }
    c.x.reserve(covariate_names.size());
    for (std::size_t j = 0; j < c_cov.size(); ++j) {
      c.x.push_back(
          parse_double(t, r, c_cov[j], "covariate '" + covariate_names[j] + "'",
                       " (cluster '" + c.cluster_id + "')"));
    }
    clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<std::string> covariate_columns(const RawTable& t,
                                           bool cluster_format) {
  const std::vector<std::string>& required = required_columns(cluster_format);
  std::vector<std::string> out;
  for (const std::string& name : t.header) {
    if (std::find(required.begin(), required.end(), name) == required.end()) {
      out.push_back(name);
    }
  }
  return out;
}

std::vector<std::string> string_column(const RawTable& t,
                                       const std::string& name) {
  const std::size_t c = find_column(t, name);
  std::vector<std::string> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(row[c]);
  return out;
}

std::string csv_escape(const std::string& field) {
  const bool needs_quote =
      field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quote) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace randbal
