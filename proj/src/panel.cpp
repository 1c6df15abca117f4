#include "dbflu/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include "dbflu/csv.hpp"

namespace dbflu {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_value(const std::string& s, const std::string& path) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("parse_panel: non-numeric wILI value '" + s + "' in " + path);
  }
  if (pos != s.size() || !std::isfinite(v)) {
    throw std::runtime_error("parse_panel: non-numeric wILI value '" + s + "' in " + path);
  }
  return v;
}

struct RawRow {
  int season;
  int week;
  int issue;  // -1 when absent
  double value;
};

std::vector<RawRow> read_rows(const std::string& path, const PanelOptions& opts, bool* any_issue) {
  const CsvTable table = read_csv(path);
  const int c_season = table.column("season");
  const int c_week = table.column("week");
  const int c_year = table.column("year");
  const int c_mmwr = table.column("mmwr_week");
  int c_wili = table.column("wili");
  bool force_percent = false;
  if (c_wili < 0) {
    c_wili = table.column("wili_percent");
    force_percent = c_wili >= 0;
  }
  const int c_issue = table.column("issue");

  const bool season_form = c_season >= 0 && c_week >= 0;
  const bool mmwr_form = c_year >= 0 && c_mmwr >= 0;
  if (c_wili < 0 || (!season_form && !mmwr_form)) {
    throw std::runtime_error("parse_panel: header must provide wili plus (season,week) or (year,mmwr_week): " + path);
  }

  std::vector<RawRow> rows;
  double max_value = 0.0;
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& fields : table.rows) {
    if (fields.size() < table.header.size()) {
      throw std::runtime_error("parse_panel: short row in " + path);
    }
    RawRow row{};
    if (season_form) {
      row.season = std::stoi(fields[c_season]);
      row.week = std::stoi(fields[c_week]);
      if (row.week < 1 || row.week > opts.weeks) {
        throw std::runtime_error("parse_panel: season-week outside 1.." + std::to_string(opts.weeks) + " in " + path);
      }
    } else {
      const int year = std::stoi(fields[c_year]);
      const int mmwr = std::stoi(fields[c_mmwr]);
      const auto sw = mmwr_to_season_week(year, mmwr);  // throws on nonexistent weeks
      if (!sw) continue;                                // valid week outside the season window
      row.season = sw->season;
      row.week = sw->week;
    }
    row.issue = -1;
    if (c_issue >= 0 && !fields[c_issue].empty()) {
      row.issue = to_epiweek(from_epiweek(std::stoi(fields[c_issue])).first, from_epiweek(std::stoi(fields[c_issue])).second);
    }
    row.value = parse_value(fields[c_wili], path);
    if (!seen.insert({row.season, row.week, row.issue}).second) {
      throw std::runtime_error("parse_panel: duplicate (season, week, issue) row in " + path);
    }
    max_value = std::max(max_value, row.value);
    if (any_issue && row.issue >= 0) *any_issue = true;
    rows.push_back(row);
  }

  const bool percent = force_percent || max_value > 1.0;
  for (auto& row : rows) {
    if (percent) row.value /= 100.0;
    if (row.value < 0.0 || row.value > 1.0) {
      throw std::runtime_error("parse_panel: wILI value outside [0,1] after unit conversion in " + path);
    }
    row.value = std::clamp(row.value, opts.boundary_clamp, 1.0 - opts.boundary_clamp);
  }
  if (!opts.include_pandemic) {
    std::erase_if(rows, [](const RawRow& r) { return r.season == 2008 || r.season == 2009; });
  }
  return rows;
}

SeasonPanel assemble(const std::vector<RawRow>& rows, int weeks, const std::string& vintage) {
  std::set<int> season_set;
  for (const auto& r : rows) season_set.insert(r.season);
  SeasonPanel panel;
  panel.seasons.assign(season_set.begin(), season_set.end());
  panel.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(panel.seasons.size()), weeks, kNaN);
  panel.vintage = vintage;
  // Latest issue wins per cell.
  std::map<std::pair<int, int>, int> best_issue;
  for (const auto& r : rows) {
    const int j = panel.index_of(r.season);
    const auto key = std::make_pair(r.season, r.week);
    auto it = best_issue.find(key);
    if (it == best_issue.end() || r.issue >= it->second) {
      best_issue[key] = r.issue;
      panel.values(j, r.week - 1) = r.value;
    }
  }
  return panel;
}

}  // namespace

int SeasonPanel::index_of(int season) const {
  for (std::size_t j = 0; j < seasons.size(); ++j) {
    if (seasons[j] == season) return static_cast<int>(j);
  }
  return -1;
}

int SeasonPanel::n_observed() const {
  int n = 0;
  for (Eigen::Index j = 0; j < values.rows(); ++j) {
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
      if (std::isfinite(values(j, t))) ++n;
    }
  }
  return n;
}

SeasonPanel parse_panel(const std::string& path, const PanelOptions& opts) {
  bool any_issue = false;
  const auto rows = read_rows(path, opts, &any_issue);
  return assemble(rows, opts.weeks, any_issue ? "latest-issue" : "final");
}

void write_panel(const SeasonPanel& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_panel: cannot open " + path);
  out << "season,week,wili\n";
  for (int j = 0; j < panel.n_seasons(); ++j) {
    for (int w = 1; w <= panel.weeks(); ++w) {
      if (!panel.observed(j, w)) continue;
      out << panel.seasons[j] << ',' << w << ',' << format_double(panel.value(j, w)) << '\n';
    }
  }
}

SeasonPanel mask_after(const SeasonPanel& panel, int season, int week) {
  SeasonPanel out = panel;
  const int j = out.index_of(season);
  if (j < 0) throw std::invalid_argument("mask_after: season not in panel");
  for (int t = week; t < out.weeks(); ++t) out.values(j, t) = kNaN;
  return out;
}

SeasonPanel drop_season(const SeasonPanel& panel, int season) {
  const int j = panel.index_of(season);
  if (j < 0) return panel;
  SeasonPanel out;
  out.vintage = panel.vintage;
  out.seasons = panel.seasons;
  out.seasons.erase(out.seasons.begin() + j);
  out.values.resize(panel.values.rows() - 1, panel.values.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < panel.values.rows(); ++i) {
    if (i == j) continue;
    out.values.row(r++) = panel.values.row(i);
  }
  return out;
}

VintageStore VintageStore::load(const std::string& path, const PanelOptions& opts) {
  bool any_issue = false;
  const auto raw = read_rows(path, opts, &any_issue);
  VintageStore store;
  store.weeks_ = opts.weeks;
  store.clamp_ = opts.boundary_clamp;
  store.has_issues_ = any_issue;
  std::set<int> season_set;
  for (const auto& r : raw) {
    store.rows_.push_back({r.season, r.week, r.issue, r.value});
    season_set.insert(r.season);
  }
  store.seasons_.assign(season_set.begin(), season_set.end());
  return store;
}

VintageStore VintageStore::from_final(const SeasonPanel& panel) {
  VintageStore store;
  store.weeks_ = panel.weeks();
  store.seasons_ = panel.seasons;
  store.has_issues_ = false;
  for (int j = 0; j < panel.n_seasons(); ++j) {
    for (int w = 1; w <= panel.weeks(); ++w) {
      if (panel.observed(j, w)) store.rows_.push_back({panel.seasons[j], w, -1, panel.value(j, w)});
    }
  }
  return store;
}

SeasonPanel VintageStore::at_issue(int issue) const {
  if (!has_issues_) throw std::runtime_error("VintageStore::at_issue: store has no issue labels");
  std::vector<Row> kept;
  for (const auto& r : rows_) {
    if (r.issue >= 0 && r.issue <= issue) kept.push_back(r);
  }
  SeasonPanel panel;
  std::set<int> season_set;
  for (const auto& r : kept) season_set.insert(r.season);
  panel.seasons.assign(season_set.begin(), season_set.end());
  panel.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(panel.seasons.size()), weeks_, kNaN);
  panel.vintage = std::to_string(issue);
  std::map<std::pair<int, int>, int> best;
  for (const auto& r : kept) {
    const auto key = std::make_pair(r.season, r.week);
    auto it = best.find(key);
    if (it == best.end() || r.issue > it->second) {
      best[key] = r.issue;
      panel.values(panel.index_of(r.season), r.week - 1) = r.value;
    }
  }
  return panel;
}

SeasonPanel VintageStore::final_panel() const {
  SeasonPanel panel;
  panel.seasons = seasons_;
  panel.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(seasons_.size()), weeks_, kNaN);
  panel.vintage = "final";
  std::map<std::pair<int, int>, int> best;
  for (const auto& r : rows_) {
    const auto key = std::make_pair(r.season, r.week);
    auto it = best.find(key);
    if (it == best.end() || r.issue >= it->second) {
      best[key] = r.issue;
      panel.values(panel.index_of(r.season), r.week - 1) = r.value;
    }
  }
  return panel;
}

}  // namespace dbflu
