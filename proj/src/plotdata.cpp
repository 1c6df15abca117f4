#include "dbflu/plotdata.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include "dbflu/csv.hpp"
#include "dbflu/forecast.hpp"
#include "dbflu/svg.hpp"

namespace fs = std::filesystem;

namespace dbflu {

namespace {

std::ofstream open_table(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / (name + ".csv"));
  if (!out) throw std::runtime_error("plotdata: cannot open " + (dir / (name + ".csv")).string());
  return out;
}

SvgSeries season_series(const SeasonPanel& panel, int j, const std::string& color) {
  SvgSeries s;
  s.color = color;
  for (int w = 1; w <= panel.weeks(); ++w) {
    if (!panel.observed(j, w)) continue;
    s.x.push_back(w);
    s.y.push_back(panel.value(j, w));
  }
  return s;
}

}  // namespace

void emit_wili_plotdata(const SeasonPanel& panel, const std::string& out_dir) {
  const fs::path dir(out_dir);
  auto table = open_table(dir, "wili");
  table << "season,week,wili\n";
  for (int j = 0; j < panel.n_seasons(); ++j) {
    for (int w = 1; w <= panel.weeks(); ++w) {
      if (panel.observed(j, w)) table << panel.seasons[static_cast<std::size_t>(j)] << ',' << w << ',' << format_double(panel.value(j, w)) << '\n';
    }
  }
  auto peaks = open_table(dir, "wili_peaks");
  peaks << "season,peak_week,peak_intensity\n";
  SvgChartSpec chart;
  chart.title = "wILI by season";
  chart.x_label = "season week";
  chart.y_label = "wILI";
  SvgSeries points;
  points.points_only = true;
  points.color = "#000000";
  for (int j = 0; j < panel.n_seasons(); ++j) {
    Eigen::VectorXd row = panel.values.row(j).transpose();
    for (Eigen::Index t = 0; t < row.size(); ++t) {
      if (!std::isfinite(row(t))) row(t) = 0.0;  // peaks are interior; gaps are at season edges
    }
    const SeasonTargets targets = compute_targets(row, 0.0);
    peaks << panel.seasons[static_cast<std::size_t>(j)] << ',' << targets.peak_week << ','
          << format_double(targets.peak_intensity) << '\n';
    points.x.push_back(targets.peak_week);
    points.y.push_back(targets.peak_intensity);
    chart.series.push_back(season_series(panel, j, "#aaaaaa"));
  }
  chart.series.push_back(points);
  write_svg_chart(chart, (dir / "wili.svg").string());
}

void emit_typicality_plotdata(const SeasonPanel& panel, const std::string& out_dir) {
  const fs::path dir(out_dir);
  const auto ranking = mse_typicality(panel);
  auto table = open_table(dir, "typicality");
  table << "rank,season,mse\n";
  int rank = 1;
  SvgChartSpec chart;
  chart.title = "Season MSE vs average of other seasons";
  chart.x_label = "rank (descending MSE)";
  chart.y_label = "MSE";
  SvgSeries points;
  points.points_only = true;
  points.color = "#000000";
  for (const auto& [season, mse] : ranking) {
    table << rank << ',' << season << ',' << format_double(mse) << '\n';
    points.x.push_back(rank);
    points.y.push_back(mse);
    ++rank;
  }
  chart.series.push_back(points);
  write_svg_chart(chart, (dir / "typicality.svg").string());

  auto detail = open_table(dir, "typicality_curves");
  detail << "season,week,wili,others_avg\n";
  for (int j = 0; j < panel.n_seasons(); ++j) {
    for (int w = 1; w <= panel.weeks(); ++w) {
      if (!panel.observed(j, w)) continue;
      double sum = 0.0;
      int m = 0;
      for (int k = 0; k < panel.n_seasons(); ++k) {
        if (k == j || !panel.observed(k, w)) continue;
        sum += panel.value(k, w);
        ++m;
      }
      if (m == 0) continue;
      detail << panel.seasons[static_cast<std::size_t>(j)] << ',' << w << ',' << format_double(panel.value(j, w))
             << ',' << format_double(sum / m) << '\n';
    }
  }
}

void emit_sirfit_plotdata(const SeasonPanel& panel, const std::vector<SeasonSirFit>& fits,
                          const std::string& out_dir) {
  const fs::path dir(out_dir);
  auto table = open_table(dir, "sir_fit");
  table << "season,week,wili,sir_fit\n";
  SvgChartSpec chart;
  chart.title = "Best-fit SIR trajectories";
  chart.x_label = "season week";
  chart.y_label = "proportion";
  for (const auto& fit : fits) {
    const int j = panel.index_of(fit.season);
    if (j < 0) continue;
    const SirTrajectory traj = solve_sir(fit.params, panel.weeks());
    SvgSeries line;
    line.color = "#222222";
    for (int w = 1; w <= panel.weeks(); ++w) {
      line.x.push_back(w);
      line.y.push_back(traj.i(w - 1));
      table << fit.season << ',' << w << ','
            << (panel.observed(j, w) ? format_double(panel.value(j, w)) : std::string()) << ','
            << format_double(traj.i(w - 1)) << '\n';
    }
    chart.series.push_back(season_series(panel, j, "#bbbbbb"));
    chart.series.push_back(line);
  }
  write_svg_chart(chart, (dir / "sir_fit.svg").string());
}

void emit_forecast_plotdata(const std::string& backtest_dir, int season, const std::string& out_dir) {
  const fs::path dir(out_dir);
  auto table = open_table(dir, "forecast_fans");
  table << "season,fit_week,week,observed,mean,lo,hi\n";
  SvgChartSpec chart;
  chart.title = "Forecast fans for season " + std::to_string(season);
  chart.x_label = "season week";
  chart.y_label = "wILI";
  const fs::path cells = fs::path(backtest_dir) / "cells";
  bool chart_done = false;
  for (const auto& entry : fs::directory_iterator(cells)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(std::to_string(season) + ".", 0) != 0) continue;
    const int fit_week = std::stoi(name.substr(name.find('.') + 1));
    const CsvTable intervals = read_csv((entry.path() / "intervals.csv").string());
    const int cw = intervals.column("week"), co = intervals.column("observed"), cm = intervals.column("mean"),
              clo = intervals.column("lo"), chi = intervals.column("hi");
    SvgSeries mean_line, lo_line, hi_line;
    mean_line.color = "#000000";
    lo_line.color = "#999999";
    hi_line.color = "#999999";
    for (const auto& row : intervals.rows) {
      table << season << ',' << fit_week << ',' << row[cw] << ',' << row[co] << ',' << row[cm] << ',' << row[clo]
            << ',' << row[chi] << '\n';
      mean_line.x.push_back(std::stod(row[cw]));
      mean_line.y.push_back(std::stod(row[cm]));
      lo_line.x.push_back(std::stod(row[cw]));
      lo_line.y.push_back(std::stod(row[clo]));
      hi_line.x.push_back(std::stod(row[cw]));
      hi_line.y.push_back(std::stod(row[chi]));
    }
    if (!chart_done) {  // chart the earliest fit; the table carries the rest
      chart.series.push_back(lo_line);
      chart.series.push_back(hi_line);
      chart.series.push_back(mean_line);
      chart_done = true;
    }
  }
  write_svg_chart(chart, (dir / "forecast_fans.svg").string());
}

void emit_coverage_plotdata(const CoverageReport& report, const std::string& out_dir) {
  const fs::path dir(out_dir);
  write_coverage_report(report, (dir / "coverage.csv").string());
  SvgChartSpec chart;
  chart.title = "Empirical coverage by week-ahead";
  chart.x_label = "weeks ahead";
  chart.y_label = "coverage";
  chart.hline = report.level;
  SvgSeries points;
  points.points_only = true;
  points.color = "#000000";
  for (const auto& c : report.by_week_ahead) {
    points.x.push_back(c.key);
    points.y.push_back(c.rate());
  }
  chart.series.push_back(points);
  fs::create_directories(dir);
  write_svg_chart(chart, (dir / "coverage.svg").string());
}

void emit_score_plotdata(const TargetScores& scores, const std::string& out_dir) {
  const fs::path dir(out_dir);
  auto table = open_table(dir, "scores");
  table << "model,target,mean_log_score\n";
  SvgChartSpec chart;
  chart.title = "Average log score by target";
  chart.x_label = "target index (pi, pt, onset, 1wk..4wk, logscore)";
  chart.y_label = "mean log score";
  const std::vector<std::string> order = {"pi", "pt", "onset", "1wk", "2wk", "3wk", "4wk"};
  for (const auto& [model, by_target] : scores.per_model_target) {
    SvgSeries points;
    points.points_only = true;
    points.color = model == "db" ? "#000000" : "#aaaaaa";
    int idx = 1;
    for (const auto& target : order) {
      const auto it = by_target.find(target);
      if (it != by_target.end()) {
        table << model << ',' << target << ',' << format_double(it->second) << '\n';
        points.x.push_back(idx);
        points.y.push_back(it->second);
      }
      ++idx;
    }
    const auto overall = scores.overall.find(model);
    if (overall != scores.overall.end()) {
      table << model << ",logscore," << format_double(overall->second) << '\n';
      points.x.push_back(idx);
      points.y.push_back(overall->second);
    }
    chart.series.push_back(points);
  }
  write_svg_chart(chart, (dir / "scores.svg").string());
}

}  // namespace dbflu
