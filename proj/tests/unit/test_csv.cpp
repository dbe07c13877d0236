#include <doctest.h>

#include <filesystem>

#include "chainsq/csv.hpp"
#include "generators.hpp"

using namespace chainsq;

TEST_CASE("doubles print with full precision and round trip") {
  gen::Rng rng(81);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.integer(-300, 300));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("quoting") {
  CHECK(csv_quote("plain") == "plain");
  CHECK(csv_quote("a,b") == "\"a,b\"");
  CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_quote("two\nlines") == "\"two\nlines\"");
  CHECK(format_cell(CsvCell{true}) == "1");
  CHECK(format_cell(CsvCell{42LL}) == "42");
}

TEST_CASE("property: quoted records parse back unchanged") {
  gen::Rng rng(83);
  for (int i = 0; i < 300; ++i) {
    std::vector<std::vector<std::string>> records(static_cast<std::size_t>(rng.integer(1, 5)));
    const int width = rng.integer(1, 4);
    std::string doc;
    for (auto& r : records) {
      for (int c = 0; c < width; ++c) r.push_back(rng.text(8));
      // a lone empty field is indistinguishable from an empty line
      if (width == 1 && r[0].empty()) r[0] = "x";
      for (int c = 0; c < width; ++c) doc += (c ? "," : "") + csv_quote(r[static_cast<std::size_t>(c)]);
      doc += "\r\n";
    }
    CAPTURE(doc);
    CHECK(parse_csv(doc) == records);
  }
}

TEST_CASE("writer emits header, rows and the sibling manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "chainsq_csv_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "nested" / "table.csv";
  {
    CsvWriter w(path, {{"phi", "rad"}, {"xi2", "1"}, {"note", ""}}, "[manifest]\nversion = t\n");
    w.row({1.5, 0.25, std::string("a,b")});
    w.row({2.0, std::nan(""), std::string("")});
    CHECK(w.rows_written() == 2);
    CHECK_THROWS_AS(w.row({1.0}), std::logic_error);
  }
  {
    CsvWriter w(path, {{"phi", "rad"}, {"xi2", "1"}, {"note", ""}}, "[manifest]\nversion = t\n", true);
    w.row({3.0, 0.5, std::string("z")});
  }
  const auto rows = read_csv(path);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"phi [rad]", "xi2 [1]", "note"});
  CHECK(rows[1] == std::vector<std::string>{"1.5", "0.25", "a,b"});
  CHECK(rows[2][1] == "nan");
  CHECK(rows[3][0] == "3");
  CHECK(std::filesystem::exists(dir / "nested" / "table.manifest.ini"));
  CHECK(manifest_path_for("x/y.csv") == std::filesystem::path("x/y.manifest.ini"));
  std::filesystem::remove_all(dir);
}
