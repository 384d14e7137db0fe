#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "randbal/common.hpp"
#include "randbal/csv.hpp"

using randbal::InputError;
using randbal::RawTable;
using randbal::read_csv;

namespace {

RawTable parse(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in, "test.csv");
}

}  // namespace

TEST_CASE("plain csv round trip") {
  const RawTable t = parse("a,b,c\n1,2,3\n4,5,6\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"1", "2", "3"});
  CHECK(t.rows[1] == std::vector<std::string>{"4", "5", "6"});
}

TEST_CASE("quoting: embedded commas, quotes, and newlines") {
  const RawTable t = parse("name,note\n\"x,y\",\"he said \"\"hi\"\"\"\nplain,\"line1\nline2\"\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x,y");
  CHECK(t.rows[0][1] == "he said \"hi\"");
  CHECK(t.rows[1][1] == "line1\nline2");
}

TEST_CASE("crlf line endings and missing trailing newline") {
  const RawTable t = parse("a,b\r\n1,2\r\n3,4");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1] == std::vector<std::string>{"3", "4"});
}

TEST_CASE("empty fields are preserved") {
  const RawTable t = parse("a,b,c\n1,,3\n");
  CHECK(t.rows[0][1] == "");
}

TEST_CASE("structural errors carry row diagnostics") {
  CHECK_THROWS_WITH_AS(parse("a,b\n1,2,3\n"),
                       doctest::Contains("row 2"), InputError);
  CHECK_THROWS_WITH_AS(parse("a,b\n\"unterminated\n"),
                       doctest::Contains("unterminated"), InputError);
  CHECK_THROWS_AS(parse("a,a\n1,2\n"), InputError);   // duplicate column
  CHECK_THROWS_AS(parse(""), InputError);             // empty file
  CHECK_THROWS_AS(parse("a,b\n"), InputError);        // header only
  CHECK_THROWS_AS(parse("a,b\n1,\"2\"x\n"), InputError);  // junk after quote
}

TEST_CASE("unit table ingestion and diagnostics") {
  const RawTable t = parse(
      "cluster_id,block_id,z,age,score\n"
      "c1,b1,1,30,2\n"
      "c1,b1,1,40,3\n"
      "c2,b1,0,50,4\n");
  const auto units = randbal::units_from_table(t, {"age", "score"});
  REQUIRE(units.size() == 3);
  CHECK(units[0].cluster_id == "c1");
  CHECK(units[0].covariates == std::vector<double>{30.0, 2.0});
  CHECK(units[2].z == 0);

  // Missing covariate value names row, covariate, and cluster.
  const RawTable bad = parse(
      "cluster_id,block_id,z,age\n"
      "c1,b1,1,30\n"
      "c2,b1,0,\n");
  CHECK_THROWS_WITH_AS(randbal::units_from_table(bad, {"age"}),
                       doctest::Contains("covariate 'age'"), InputError);
  CHECK_THROWS_WITH_AS(randbal::units_from_table(bad, {"age"}),
                       doctest::Contains("row 3"), InputError);

  const RawTable badz = parse("cluster_id,block_id,z,age\nc1,b1,2,30\n");
  CHECK_THROWS_WITH_AS(randbal::units_from_table(badz, {"age"}),
                       doctest::Contains("z must be 0 or 1"), InputError);

  CHECK_THROWS_WITH_AS(randbal::units_from_table(t, {"height"}),
                       doctest::Contains("'height'"), InputError);
}

TEST_CASE("cluster table ingestion validates m") {
  const RawTable t = parse(
      "cluster_id,block_id,z,m,x\n"
      "c1,b1,1,3,7\n"
      "c2,b1,0,2,5\n");
  const auto clusters = randbal::clusters_from_table(t, {"x"});
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0].m == 3.0);
  CHECK(clusters[0].x == std::vector<double>{7.0});

  const RawTable frac = parse("cluster_id,block_id,z,m,x\nc1,b1,1,2.5,7\n");
  CHECK_THROWS_WITH_AS(randbal::clusters_from_table(frac, {"x"}),
                       doctest::Contains("integer >= 1"), InputError);
  const RawTable zero = parse("cluster_id,block_id,z,m,x\nc1,b1,1,0,7\n");
  CHECK_THROWS_AS(randbal::clusters_from_table(zero, {"x"}), InputError);
}

TEST_CASE("default covariate selection excludes required columns") {
  const RawTable t = parse("cluster_id,block_id,z,m,x,y\nc1,b1,1,2,3,4\n");
  CHECK(randbal::covariate_columns(t, true) ==
        std::vector<std::string>{"x", "y"});
  CHECK(randbal::covariate_columns(t, false) ==
        std::vector<std::string>{"m", "x", "y"});
}

TEST_CASE("string columns serve candidate labels") {
  const RawTable t = parse("cluster_id,block_id,z,m,size_band\nc1,b1,1,2,small\nc2,b1,0,2,large\n");
  CHECK(randbal::string_column(t, "size_band") ==
        std::vector<std::string>{"small", "large"});
}

TEST_CASE("csv escaping round-trips through the parser") {
  std::ostringstream out;
  randbal::write_csv_row(out, {"plain", "a,b", "q\"q", "n\nn"});
  randbal::write_csv_row(out, {"1", "2", "3", "4"});
  std::istringstream in("h1,h2,h3,h4\n" + out.str());
  const RawTable t = read_csv(in, "roundtrip.csv");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0] == std::vector<std::string>{"plain", "a,b", "q\"q", "n\nn"});
}
