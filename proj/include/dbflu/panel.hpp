#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/mmwr.hpp"

namespace dbflu {

// Observed wILI by season and season-week. values(j, t) holds the proportion
// for season seasons[j] at season-week t+1, NaN where unobserved. All values
// are proportions in (0,1); ingestion clamps away from the Beta boundary.
struct SeasonPanel {
  std::vector<int> seasons;
  Eigen::MatrixXd values;
  std::string vintage = "final";

  int n_seasons() const { return static_cast<int>(seasons.size()); }
  int weeks() const { return static_cast<int>(values.cols()); }

  // week is 1-based.
  bool observed(int j, int week) const { return std::isfinite(values(j, week - 1)); }
  double value(int j, int week) const { return values(j, week - 1); }

  // Index of a season id; -1 if absent.
  int index_of(int season) const;

  // Count of observed cells.
  int n_observed() const;
};

struct PanelOptions {
  bool include_pandemic = false;  // drop 2008 and 2009 unless set
  int weeks = kSeasonWeeks;
  double boundary_clamp = 1e-6;  // wILI of exactly 0 or 1 is pulled inside (0,1)
};

// Reads the canonical comma-delimited panel format. Accepted week columns:
// (season, week) or (year, mmwr_week); value column `wili` (auto-detected
// percent scale when the max exceeds 1) or `wili_percent` (always percent);
// optional `issue` column with YYYYWW labels. When several issues cover a
// cell the latest one wins. Rows whose MMWR week falls outside the 35-week
// season window are skipped.
SeasonPanel parse_panel(const std::string& path, const PanelOptions& opts = {});

void write_panel(const SeasonPanel& panel, const std::string& path);

// Copy of `panel` with the target season's weeks beyond `week` removed.
SeasonPanel mask_after(const SeasonPanel& panel, int season, int week);

// Copy of `panel` without the given season.
SeasonPanel drop_season(const SeasonPanel& panel, int season);

// Issue week (YYYYWW) at which a season-week's estimate is first published.
inline int issue_of_season_week(int season, int week) {
  const auto [year, mmwr] = season_week_to_mmwr(season, week);
  return to_epiweek(year, mmwr);
}

// Revision history of a panel: one snapshot per issue week, later issues
// revising earlier weeks. Snapshots are immutable once built.
class VintageStore {
 public:
  struct Row {
    int season;
    int week;
    int issue;  // YYYYWW
    double value;
  };

  static VintageStore load(const std::string& path, const PanelOptions& opts = {});
  static VintageStore from_final(const SeasonPanel& panel);

  // Panel as known at `issue`: per cell, the value of the latest issue <= issue.
  SeasonPanel at_issue(int issue) const;

  // Panel using the latest available issue per cell.
  SeasonPanel final_panel() const;

  const std::vector<Row>& rows() const { return rows_; }
  bool has_issues() const { return has_issues_; }

 private:
  std::vector<Row> rows_;
  std::vector<int> seasons_;
  int weeks_ = kSeasonWeeks;
  double clamp_ = 1e-6;
  bool has_issues_ = false;
};

}  // namespace dbflu
