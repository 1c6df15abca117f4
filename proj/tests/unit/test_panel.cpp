#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dbflu/panel.hpp"

using namespace dbflu;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "dbflu_panel_tests";
  fs::create_directories(dir);
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("parse_panel: proportions stored as given") {
  const auto path = write_temp("plain.csv",
                               "season,week,wili\n"
                               "2015,3,0.0135\n"
                               "2015,4,0.0141\n");
  const SeasonPanel panel = parse_panel(path.string());
  REQUIRE(panel.n_seasons() == 1);
  CHECK(panel.value(0, 3) == doctest::Approx(0.0135));
  CHECK(panel.observed(0, 4));
  CHECK_FALSE(panel.observed(0, 5));
}

TEST_CASE("parse_panel: percent scale detected from the maximum") {
  const auto path = write_temp("percent.csv",
                               "season,week,wili\n"
                               "2015,3,1.35\n"
                               "2015,4,1.41\n");
  const SeasonPanel panel = parse_panel(path.string());
  CHECK(panel.value(0, 3) == doctest::Approx(0.0135));
}

TEST_CASE("parse_panel: wili_percent column forces percent scale") {
  const auto path = write_temp("percent2.csv",
                               "season,week,wili_percent\n"
                               "2015,3,0.9\n");
  const SeasonPanel panel = parse_panel(path.string());
  CHECK(panel.value(0, 3) == doctest::Approx(0.009));
}

TEST_CASE("parse_panel: missing trailing weeks stay missing and the panel is valid") {
  std::string content = "season,week,wili\n";
  for (int w = 1; w <= 33; ++w) content += "1998," + std::to_string(w) + ",0.02\n";
  const SeasonPanel panel = parse_panel(write_temp("gaps.csv", content).string());
  CHECK(panel.observed(0, 33));
  CHECK_FALSE(panel.observed(0, 34));
  CHECK_FALSE(panel.observed(0, 35));
  CHECK(panel.n_observed() == 33);
}

TEST_CASE("parse_panel error paths") {
  CHECK_THROWS_WITH_AS(parse_panel(write_temp("dup.csv",
                                              "season,week,wili\n"
                                              "2015,3,0.01\n"
                                              "2015,3,0.02\n")
                                       .string()),
                       doctest::Contains("duplicate"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_panel(write_temp("nan.csv",
                                              "season,week,wili\n"
                                              "2015,3,abc\n")
                                       .string()),
                       doctest::Contains("non-numeric"), std::runtime_error);
  CHECK_THROWS_AS(parse_panel(write_temp("badweek.csv",
                                         "season,week,wili\n"
                                         "2015,36,0.01\n")
                                  .string()),
                  std::runtime_error);
  CHECK_THROWS_AS(parse_panel(write_temp("badhdr.csv",
                                         "foo,bar\n"
                                         "1,2\n")
                                  .string()),
                  std::runtime_error);
}

TEST_CASE("parse_panel: MMWR year+week form maps into the season window") {
  const auto path = write_temp("mmwr.csv",
                               "year,mmwr_week,wili\n"
                               "1998,40,1.2\n"
                               "1999,1,1.8\n"
               	                "1999,30,5.0\n");  // summer week: skipped
  const SeasonPanel panel = parse_panel(path.string());
  REQUIRE(panel.n_seasons() == 1);
  CHECK(panel.seasons[0] == 1998);
  CHECK(panel.value(0, 1) == doctest::Approx(0.012));
  CHECK(panel.value(0, 14) == doctest::Approx(0.018));
  CHECK(panel.n_observed() == 2);
}

TEST_CASE("pandemic seasons drop by default and stay with the flag") {
  const auto path = write_temp("pandemic.csv",
                               "season,week,wili\n"
                               "2008,3,0.01\n"
                               "2010,3,0.01\n");
  CHECK(parse_panel(path.string()).n_seasons() == 1);
  PanelOptions opts;
  opts.include_pandemic = true;
  CHECK(parse_panel(path.string(), opts).n_seasons() == 2);
}

TEST_CASE("boundary values are clamped inside (0,1)") {
  const auto path = write_temp("clamp.csv",
                               "season,week,wili\n"
                               "2015,3,0\n"
                               "2015,4,0.5\n");
  const SeasonPanel panel = parse_panel(path.string());
  CHECK(panel.value(0, 3) == doctest::Approx(1e-6));
}

TEST_CASE("round trip: parse, serialize, parse") {
  const auto path = write_temp("rt.csv",
                               "season,week,wili\n"
                               "2014,1,0.011\n"
                               "2014,2,0.013\n"
                               "2015,1,0.009\n");
  const SeasonPanel a = parse_panel(path.string());
  const fs::path out = fs::temp_directory_path() / "dbflu_panel_tests" / "rt_out.csv";
  write_panel(a, out.string());
  const SeasonPanel b = parse_panel(out.string());
  REQUIRE(a.seasons == b.seasons);
  for (int j = 0; j < a.n_seasons(); ++j) {
    for (int w = 1; w <= a.weeks(); ++w) {
      CHECK(a.observed(j, w) == b.observed(j, w));
      if (a.observed(j, w)) CHECK(a.value(j, w) == b.value(j, w));
    }
  }
}

TEST_CASE("mask_after hides only the target season's later weeks") {
  const auto path = write_temp("mask.csv",
                               "season,week,wili\n"
                               "2014,1,0.011\n2014,2,0.012\n2014,3,0.013\n"
                               "2015,1,0.021\n2015,2,0.022\n2015,3,0.023\n");
  const SeasonPanel panel = parse_panel(path.string());
  const SeasonPanel masked = mask_after(panel, 2015, 2);
  const int j15 = masked.index_of(2015);
  const int j14 = masked.index_of(2014);
  CHECK(masked.observed(j15, 1));
  CHECK(masked.observed(j15, 2));
  CHECK_FALSE(masked.observed(j15, 3));
  CHECK(masked.observed(j14, 3));
}

TEST_CASE("vintage store: later issues revise, snapshots are faithful") {
  const auto path = write_temp("vintage.csv",
                               "season,week,wili,issue\n"
                               "2015,3,1.35,201543\n"
                               "2015,3,1.41,201544\n"
                               "2015,4,1.40,201544\n");
  const VintageStore store = VintageStore::load(path.string());
  REQUIRE(store.has_issues());
  const SeasonPanel wk3 = store.at_issue(201543);
  CHECK(wk3.value(0, 3) == doctest::Approx(0.0135));
  CHECK_FALSE(wk3.observed(0, 4));
  const SeasonPanel wk4 = store.at_issue(201544);
  CHECK(wk4.value(0, 3) == doctest::Approx(0.0141));
  CHECK(wk4.observed(0, 4));
  const SeasonPanel fin = store.final_panel();
  CHECK(fin.value(0, 3) == doctest::Approx(0.0141));
  CHECK_THROWS_AS(VintageStore::from_final(fin).at_issue(201544), std::runtime_error);
}
