#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dbflu/csv.hpp"
#include "dbflu/math.hpp"
#include "dbflu/panel.hpp"
#include "dbflu/rng.hpp"
#include "dbflu/sir.hpp"

using namespace dbflu;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DBFLU_CLI_PATH) + " " + args + " >/dev/null 2>/tmp/dbflu_cli_err.txt";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string last_stderr() {
  std::ifstream in("/tmp/dbflu_cli_err.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small synthetic panel file: SIR curves plus noise, enough for the prior
// machinery to work with.
fs::path synthetic_panel() {
  const fs::path dir = fs::temp_directory_path() / "dbflu_cli_tests";
  fs::create_directories(dir);
  const fs::path path = dir / "panel.csv";
  if (fs::exists(path)) return path;
  Rng rng(31337);
  std::ofstream out(path);
  out << "season,week,wili\n";
  for (int season = 2010; season <= 2014; ++season) {
    const double i0 = 0.003 + 0.0015 * rng.uniform();
    const double beta = 0.8 + 0.3 * rng.uniform();
    const double rho = 0.65 + 0.1 * rng.uniform();
    const auto traj = solve_sir(SirParams(0.9, i0, beta, rho), 35);
    for (int w = 1; w <= 35; ++w) {
      const double y = rng.beta(4500.0 * traj.i(w - 1), 4500.0 * (1.0 - traj.i(w - 1)));
      out << season << ',' << w << ',' << format_double(y) << '\n';
    }
  }
  return path;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("") == 2);                     // missing subcommand
  CHECK(run_cli("definitely-not-a-command") == 2);
  const std::string panel = synthetic_panel().string();
  CHECK(run_cli("forecast --season 2014 --week 2 --data " + panel + " --mode ci") == 2);   // week < 3
  CHECK(run_cli("forecast --season 2014 --week 31 --data " + panel + " --mode ci") == 2);  // week > 30
  CHECK(run_cli("backtest --data " + panel + " --mode bogus") == 2);
}

TEST_CASE("missing input files exit 2 and name the path") {
  CHECK(run_cli("fit-priors --data /nowhere/panel.csv") == 2);
  CHECK(last_stderr().find("/nowhere/panel.csv") != std::string::npos);
  CHECK(run_cli("fit-priors --config /nowhere/conf.cfg") == 2);
  CHECK(last_stderr().find("/nowhere/conf.cfg") != std::string::npos);
}

TEST_CASE("fit-priors writes the fits table and one prior per excluded season") {
  const fs::path out = fs::temp_directory_path() / "dbflu_cli_tests" / "priors_out";
  fs::remove_all(out);
  CHECK(run_cli("fit-priors --data " + synthetic_panel().string() + " --out " + out.string()) == 0);
  REQUIRE(fs::exists(out / "sir_fits.csv"));
  std::ifstream in(out / "sir_fits.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "season,i0,beta,rho,sse");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  for (int season = 2010; season <= 2014; ++season) {
    CHECK(fs::exists(out / ("prior_excl_" + std::to_string(season) + ".txt")));
  }
  CHECK(fs::exists(out / "manifest.txt"));
}

TEST_CASE("score reproduces the worked log-score example end to end") {
  const fs::path dir = fs::temp_directory_path() / "dbflu_cli_tests";
  fs::create_directories(dir);

  // A season whose peak sits at week 20.
  const fs::path panel = dir / "peak20.csv";
  {
    std::ofstream out(panel);
    out << "season,week,wili\n";
    for (int w = 1; w <= 35; ++w) {
      double y = 0.01 + 0.002 * std::sin(w / 5.0);
      if (w == 20) y = 0.06;
      out << "2015," << w << ',' << format_double(y) << '\n';
    }
  }
  const fs::path subs = dir / "subs.csv";
  {
    std::ofstream out(subs);
    out << "model,week,target,bin_start,bin_end,probability\n";
    out << "db,10,pt,19,20,0.1\n";
    out << "db,10,pt,20,21,0.3\n";
    out << "db,10,pt,21,22,0.2\n";
    out << "db,10,pt,5,6,0.4\n";
  }
  const fs::path out_dir = dir / "score_out";
  fs::remove_all(out_dir);
  CHECK(run_cli("score --season 2015 --data " + panel.string() + " --submissions " + subs.string() + " --out " +
                out_dir.string()) == 0);
  const CsvTable scores = read_csv((out_dir / "scores.csv").string());
  REQUIRE(scores.rows.size() == 2);  // pt + overall
  bool found = false;
  for (const auto& row : scores.rows) {
    if (row[1] == "pt") {
      CHECK(std::stod(row[2]) == doctest::Approx(std::log(0.6)).epsilon(1e-9));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("plotdata emits tidy tables with charts") {
  const fs::path out = fs::temp_directory_path() / "dbflu_cli_tests" / "plot_out";
  fs::remove_all(out);
  CHECK(run_cli("plotdata --what wili --data " + synthetic_panel().string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "wili.csv"));
  CHECK(fs::exists(out / "wili.svg"));
  CHECK(fs::exists(out / "wili_peaks.csv"));
  CHECK(run_cli("plotdata --what typicality --data " + synthetic_panel().string() + " --out " + out.string()) == 0);
  CHECK(fs::exists(out / "typicality.csv"));
  CHECK(fs::exists(out / "typicality.svg"));
}

TEST_CASE("forecast is deterministic given the manifest inputs") {
  const fs::path dir = fs::temp_directory_path() / "dbflu_cli_tests";
  const fs::path out1 = dir / "fc1";
  const fs::path out2 = dir / "fc2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  const std::string base = "forecast --season 2014 --week 5 --mode ci --seed 42 --data " +
                           synthetic_panel().string() + " --out ";
  REQUIRE(run_cli(base + out1.string()) == 0);
  REQUIRE(run_cli(base + out2.string()) == 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(out1 / "submission.csv") == slurp(out2 / "submission.csv"));
  CHECK(slurp(out1 / "intervals.csv") == slurp(out2 / "intervals.csv"));
  CHECK(fs::exists(out1 / "convergence.txt"));
  // Seven targets in the submission.
  const CsvTable table = read_csv((out1 / "submission.csv").string());
  std::set<std::string> targets;
  const int ct = table.column("target");
  for (const auto& row : table.rows) targets.insert(row[ct]);
  CHECK(targets.size() == 7);
}
