#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "randbal/types.hpp"

namespace randbal {

// A parsed CSV file: header row plus string fields, RFC-4180 quoting.
struct RawTable {
  std::string source;  // file name for diagnostics
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawTable read_csv(std::istream& in, const std::string& source_name);
RawTable read_csv_file(const std::string& path);

// Column index by header name; throws InputError naming the column.
std::size_t find_column(const RawTable& t, const std::string& name);
bool has_column(const RawTable& t, const std::string& name);

// Unit-format ingestion: required columns cluster_id, block_id, z; the
// named covariate columns are parsed as doubles. Errors carry the row
// number, cluster, and covariate name.
std::vector<UnitRecord> units_from_table(
    const RawTable& t, const std::vector<std::string>& covariate_names);

// Cluster-format ingestion: required columns cluster_id, block_id, z, m.
std::vector<ClusterRecord> clusters_from_table(
    const RawTable& t, const std::vector<std::string>& covariate_names);

// Header names that are not required columns of the given format; the
// default covariate selection.
std::vector<std::string> covariate_columns(const RawTable& t,
                                           bool cluster_format);

// A whole column as strings (candidate block labels and similar).
std::vector<std::string> string_column(const RawTable& t,
                                       const std::string& name);

// RFC-4180 escaping for one field.
std::string csv_escape(const std::string& field);

// Writes one CSV record (no trailing newline handling beyond '\n').
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace randbal
