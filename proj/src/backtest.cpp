#include "dbflu/backtest.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "dbflu/csv.hpp"
#include "dbflu/priors.hpp"
#include "dbflu/rng.hpp"

namespace fs = std::filesystem;

namespace dbflu {

namespace {

std::string cell_dir_name(int season, int week) { return std::to_string(season) + "." + std::to_string(week); }

// One Season.Week fit: leave-one-out prior, posterior, predictive set,
// binned submissions, interval table. Writes into a temp dir and renames so
// a completed cell is always whole.
void run_cell(const BacktestPlan& plan, const VintageStore& store, const fs::path& cells_dir, int season,
              int week) {
  SeasonPanel snapshot = plan.faithful_vintage ? store.at_issue(issue_of_season_week(season, week))
                                               : store.final_panel();
  const int j = snapshot.index_of(season);
  if (j < 0) throw std::runtime_error("target season missing from snapshot");
  SeasonPanel panel = mask_after(snapshot, season, week);

  // Empirical prior from every other season's fitted SIR curve.
  std::vector<SeasonSirFit> fits;
  for (int k = 0; k < panel.n_seasons(); ++k) {
    if (panel.seasons[static_cast<std::size_t>(k)] == season) continue;
    try {
      fits.push_back(fit_sir_to_season(panel.seasons[static_cast<std::size_t>(k)], panel.values.row(k).transpose()));
    } catch (const std::invalid_argument&) {
      // too few observed weeks at this vintage; leave that season out
    }
  }
  const TruncatedMvnPrior prior = fit_prior(fits, season);

  SamplerConfig sampler = plan.sampler;
  sampler.seed = cell_seed(plan.base_seed, season, week);
  const PosteriorDraws draws = sample_posterior(panel, prior, plan.data, plan.hyper, sampler);
  const PredictiveTrajectorySet pred = predictive_simulate(
      draws, panel, season, week, plan.data.lambda, Rng::derive_seed(sampler.seed, 0x9d5u, static_cast<std::uint64_t>(week)));

  const fs::path tmp = cells_dir / (".tmp-" + cell_dir_name(season, week));
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  write_fits(fits, (tmp / "sir_fits.csv").string());
  write_prior(prior, (tmp / "prior.txt").string());
  write_submission(all_target_forecasts(pred, plan.baseline, plan.probability_floor), (tmp / "submission.csv").string());
  write_intervals(pred, 0.95, (tmp / "intervals.csv").string());
  write_convergence_report(draws, (tmp / "convergence.txt").string());
  if (plan.save_draws) write_draws(draws, (tmp / "draws.csv").string());
  std::ofstream(tmp / "done").put('\n');

  const fs::path final_dir = cells_dir / cell_dir_name(season, week);
  fs::remove_all(final_dir);
  fs::rename(tmp, final_dir);
}

}  // namespace

int BacktestResult::n_completed() const {
  int n = 0;
  for (const auto& c : cells) n += c.ok ? 1 : 0;
  return n;
}

int BacktestResult::n_failed() const {
  int n = 0;
  for (const auto& c : cells) n += (!c.ok && !c.skipped) ? 1 : 0;
  return n;
}

std::uint64_t cell_seed(std::uint64_t base_seed, int season, int week) {
  return Rng::derive_seed(base_seed, static_cast<std::uint64_t>(season), static_cast<std::uint64_t>(week));
}

BacktestResult run_backtest(const BacktestPlan& plan, const VintageStore& store, const std::string& out_dir) {
  if (plan.week_from < 3 || plan.week_to > 30 || plan.week_from > plan.week_to) {
    throw std::invalid_argument("run_backtest: week range must lie inside [3,30]");
  }
  std::vector<int> seasons = plan.seasons;
  if (seasons.empty()) seasons = store.final_panel().seasons;

  const fs::path root(out_dir);
  const fs::path cells_dir = root / "cells";
  fs::create_directories(cells_dir);

  struct Cell {
    int season;
    int week;
  };
  std::vector<Cell> todo;
  BacktestResult result;
  result.out_dir = out_dir;
  for (int season : seasons) {
    for (int week = plan.week_from; week <= plan.week_to; ++week) {
      if (fs::exists(cells_dir / cell_dir_name(season, week) / "done")) {
        result.cells.push_back({season, week, true, true, ""});
      } else {
        todo.push_back({season, week});
      }
    }
  }

  std::vector<CellStatus> fresh(todo.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, plan.workers);
  auto worker = [&] {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= todo.size()) return;
      const Cell cell = todo[idx];
      CellStatus status{cell.season, cell.week, false, false, ""};
      try {
        run_cell(plan, store, cells_dir, cell.season, cell.week);
        status.ok = true;
      } catch (const std::exception& e) {
        status.error = e.what();
      }
      fresh[idx] = status;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  result.cells.insert(result.cells.end(), fresh.begin(), fresh.end());
  std::sort(result.cells.begin(), result.cells.end(), [](const CellStatus& a, const CellStatus& b) {
    return a.season != b.season ? a.season < b.season : a.week < b.week;
  });

  std::ofstream summary(root / "cells.csv");
  summary << "season,week,status,error\n";
  for (const auto& c : result.cells) {
    summary << c.season << ',' << c.week << ',' << (c.ok ? (c.skipped ? "skipped" : "ok") : "failed") << ",\""
            << c.error << "\"\n";
  }
  return result;
}

CoverageReport coverage_report(const std::string& backtest_dir, const SeasonPanel& truth, double level) {
  CoverageReport report;
  report.level = level;
  std::map<int, CoverageCell> by_season, by_week, by_fit_week, by_ahead;

  const fs::path cells_dir = fs::path(backtest_dir) / "cells";
  if (!fs::exists(cells_dir)) throw std::runtime_error("coverage_report: no cells/ under " + backtest_dir);
  for (const auto& entry : fs::directory_iterator(cells_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    const auto dot = name.find('.');
    if (dot == std::string::npos || name[0] == '.') continue;
    const int season = std::stoi(name.substr(0, dot));
    const int fit_week = std::stoi(name.substr(dot + 1));
    const int j = truth.index_of(season);
    if (j < 0) continue;

    const CsvTable intervals = read_csv((entry.path() / "intervals.csv").string());
    const int cw = intervals.column("week"), clo = intervals.column("lo"), chi = intervals.column("hi"),
              clv = intervals.column("level");
    if (cw < 0 || clo < 0 || chi < 0) throw std::runtime_error("coverage_report: malformed intervals.csv in " + name);
    for (const auto& row : intervals.rows) {
      const int week = std::stoi(row[cw]);
      if (week <= fit_week) continue;  // only forecasts of unobserved weeks
      if (!truth.observed(j, week)) continue;
      if (clv >= 0 && std::abs(std::stod(row[clv]) - level) > 1e-9) {
        throw std::runtime_error("coverage_report: stored interval level differs from requested level");
      }
      const double y = truth.value(j, week);
      const bool inside = y >= std::stod(row[clo]) && y <= std::stod(row[chi]);
      auto bump = [&](std::map<int, CoverageCell>& m, int key) {
        auto& cell = m[key];
        cell.key = key;
        cell.total += 1;
        if (inside) cell.inside += 1;
      };
      bump(by_season, season);
      bump(by_week, week);
      bump(by_fit_week, fit_week);
      bump(by_ahead, week - fit_week);
      report.total += 1;
      if (inside) report.inside += 1;
    }
  }
  for (const auto& [k, v] : by_season) report.by_season.push_back(v);
  for (const auto& [k, v] : by_week) report.by_week.push_back(v);
  for (const auto& [k, v] : by_fit_week) report.by_fit_week.push_back(v);
  for (const auto& [k, v] : by_ahead) report.by_week_ahead.push_back(v);
  return report;
}

void write_coverage_report(const CoverageReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_coverage_report: cannot open " + path);
  out << "partition,key,inside,total,rate\n";
  out << "overall,all," << report.inside << ',' << report.total << ',' << format_double(report.overall()) << '\n';
  auto dump = [&](const char* label, const std::vector<CoverageCell>& cells) {
    for (const auto& c : cells) {
      out << label << ',' << c.key << ',' << c.inside << ',' << c.total << ',' << format_double(c.rate()) << '\n';
    }
  };
  dump("season", report.by_season);
  dump("week", report.by_week);
  dump("fit_week", report.by_fit_week);
  dump("week_ahead", report.by_week_ahead);
}

std::vector<std::pair<int, double>> mse_typicality(const SeasonPanel& panel) {
  if (panel.n_seasons() < 3) throw std::invalid_argument("mse_typicality: need at least 3 seasons");
  std::vector<std::pair<int, double>> out;
  for (int j = 0; j < panel.n_seasons(); ++j) {
    double sum = 0.0;
    int n = 0;
    for (int week = 1; week <= panel.weeks(); ++week) {
      if (!panel.observed(j, week)) continue;
      double others = 0.0;
      int m = 0;
      for (int k = 0; k < panel.n_seasons(); ++k) {
        if (k == j || !panel.observed(k, week)) continue;
        others += panel.value(k, week);
        ++m;
      }
      if (m == 0) continue;
      const double e = panel.value(j, week) - others / m;
      sum += e * e;
      ++n;
    }
    out.emplace_back(panel.seasons[static_cast<std::size_t>(j)], n > 0 ? sum / n : 0.0);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return out;
}

}  // namespace dbflu
