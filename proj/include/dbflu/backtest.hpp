#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dbflu/forecast.hpp"
#include "dbflu/mcmc.hpp"
#include "dbflu/panel.hpp"

namespace dbflu {

// Leave-one-season-out sequential forecasting plan: one fit per
// (season, week) cell, weeks inside the challenge window.
struct BacktestPlan {
  std::vector<int> seasons;  // empty: every season in the store
  int week_from = 3;
  int week_to = 30;
  SamplerConfig sampler;
  DataModelConfig data;
  HyperConfig hyper;
  double baseline = 0.021;
  double probability_floor = 0.0;
  bool faithful_vintage = false;  // true: fit each cell on the issue-week snapshot
  int workers = 2;
  bool save_draws = false;
  std::uint64_t base_seed = 20160523;
};

struct CellStatus {
  int season = 0;
  int week = 0;
  bool ok = false;
  bool skipped = false;  // already complete before this run
  std::string error;
};

struct BacktestResult {
  std::vector<CellStatus> cells;
  std::string out_dir;
  int n_completed() const;
  int n_failed() const;
};

// Per-cell seed: hash of (base seed, season, week), so a resumed run
// reproduces an uninterrupted one byte for byte.
std::uint64_t cell_seed(std::uint64_t base_seed, int season, int week);

// Runs every planned cell (bounded worker pool), writing
// out_dir/cells/<season>.<week>/{submission.csv,intervals.csv,convergence.txt}
// plus a summary table. Completed cells are skipped on rerun; per-cell
// failures are recorded and the run continues.
BacktestResult run_backtest(const BacktestPlan& plan, const VintageStore& store, const std::string& out_dir);

// Pointwise predictive-interval coverage, partitioned the four ways.
struct CoverageCell {
  int key = 0;
  long inside = 0;
  long total = 0;
  double rate() const { return total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : 0.0; }
};

struct CoverageReport {
  double level = 0.95;
  long inside = 0;
  long total = 0;
  std::vector<CoverageCell> by_season;
  std::vector<CoverageCell> by_week;       // week of the season being forecast
  std::vector<CoverageCell> by_fit_week;   // "Week" of the Season.Week fit
  std::vector<CoverageCell> by_week_ahead;
  double overall() const { return total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : 0.0; }
};

// Scans a completed backtest directory and checks each forecast week's truth
// against the stored interval. Truth comes from the final-vintage panel.
CoverageReport coverage_report(const std::string& backtest_dir, const SeasonPanel& truth, double level = 0.95);

void write_coverage_report(const CoverageReport& report, const std::string& path);

// Season-typicality diagnostic: MSE between each season's wILI and the
// week-specific average of all other seasons, over weeks observed in both.
// Sorted by decreasing MSE (most atypical first).
std::vector<std::pair<int, double>> mse_typicality(const SeasonPanel& panel);

}  // namespace dbflu
