#pragma once

#include <string>
#include <vector>

#include "dbflu/backtest.hpp"
#include "dbflu/panel.hpp"
#include "dbflu/priors.hpp"
#include "dbflu/scoring.hpp"

namespace dbflu {

// Tidy tables plus a minimal static chart for each figure-style report.
// Every function writes <name>.csv and <name>.svg under out_dir.

// Seasonal wILI trajectories with peak week/intensity per season.
void emit_wili_plotdata(const SeasonPanel& panel, const std::string& out_dir);

// Season typicality: per-season MSE against the others' weekly average
// (descending), plus each season against that average.
void emit_typicality_plotdata(const SeasonPanel& panel, const std::string& out_dir);

// Best-fit SIR curve against observed wILI per season.
void emit_sirfit_plotdata(const SeasonPanel& panel, const std::vector<SeasonSirFit>& fits,
                          const std::string& out_dir);

// Sequential forecast fans for one season from a completed backtest.
void emit_forecast_plotdata(const std::string& backtest_dir, int season, const std::string& out_dir);

// Coverage partition tables.
void emit_coverage_plotdata(const CoverageReport& report, const std::string& out_dir);

// Average log score per target and model.
void emit_score_plotdata(const TargetScores& scores, const std::string& out_dir);

}  // namespace dbflu
