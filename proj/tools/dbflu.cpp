// Command-line frontend for the dynamic Bayesian influenza forecasting
// pipeline: prior fitting, single forecasts, leave-one-season-out backtests,
// scoring, coverage and plot-data exports.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "dbflu/backtest.hpp"
#include "dbflu/csv.hpp"
#include "dbflu/config.hpp"
#include "dbflu/fetch.hpp"
#include "dbflu/manifest.hpp"
#include "dbflu/plotdata.hpp"

namespace fs = std::filesystem;
using namespace dbflu;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string(what) + " not configured (set data_file or --data)");
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

RunManifest start_manifest(const std::string& command, const std::string& config_path, const RunConfig& rc) {
  RunManifest manifest;
  manifest.command = command;
  manifest.seed = rc.seed;
  manifest.started = iso_utc_now();
  if (!config_path.empty()) {
    manifest.config_hash = fnv1a_file_digest(config_path);
    manifest.input_digests.emplace_back(config_path, manifest.config_hash);
  }
  if (!rc.data_file.empty() && fs::exists(rc.data_file)) {
    manifest.input_digests.emplace_back(rc.data_file, fnv1a_file_digest(rc.data_file));
  }
  return manifest;
}

void finish_manifest(RunManifest manifest, const std::string& out_dir) {
  manifest.finished = iso_utc_now();
  fs::create_directories(out_dir);
  manifest.write((fs::path(out_dir) / "manifest.txt").string());
}

SeasonPanel load_panel(const RunConfig& rc) {
  require_file(rc.data_file, "panel data file");
  PanelOptions opts;
  opts.include_pandemic = rc.include_pandemic;
  opts.weeks = rc.data.weeks;
  return parse_panel(rc.data_file, opts);
}

VintageStore load_store(const RunConfig& rc) {
  require_file(rc.data_file, "panel data file");
  PanelOptions opts;
  opts.include_pandemic = rc.include_pandemic;
  opts.weeks = rc.data.weeks;
  return VintageStore::load(rc.data_file, opts);
}

std::vector<SeasonSirFit> fit_all_seasons(const SeasonPanel& panel) {
  std::vector<SeasonSirFit> fits;
  for (int j = 0; j < panel.n_seasons(); ++j) {
    fits.push_back(fit_sir_to_season(panel.seasons[static_cast<std::size_t>(j)], panel.values.row(j).transpose()));
  }
  return fits;
}

int cmd_fit_priors(const RunConfig& rc, const std::string& config_path) {
  RunManifest manifest = start_manifest("fit-priors", config_path, rc);
  const SeasonPanel panel = load_panel(rc);
  fs::create_directories(rc.out_dir);
  const auto fits = fit_all_seasons(panel);
  write_fits(fits, (fs::path(rc.out_dir) / "sir_fits.csv").string());
  for (int season : panel.seasons) {
    const TruncatedMvnPrior prior = fit_prior(fits, season);
    write_prior(prior, (fs::path(rc.out_dir) / ("prior_excl_" + std::to_string(season) + ".txt")).string());
  }
  finish_manifest(std::move(manifest), rc.out_dir);
  std::cout << "fit " << fits.size() << " seasons; priors written to " << rc.out_dir << "\n";
  return 0;
}

int cmd_forecast(const RunConfig& rc, const std::string& config_path, int season, int week) {
  if (week < 3 || week > 30) throw UsageError("forecast week must lie in [3,30]");
  RunManifest manifest = start_manifest("forecast", config_path, rc);
  const VintageStore store = load_store(rc);
  SeasonPanel snapshot = rc.vintage == "faithful" ? store.at_issue(issue_of_season_week(season, week))
                                                  : store.final_panel();
  if (snapshot.index_of(season) < 0) throw UsageError("season " + std::to_string(season) + " not in panel");
  const SeasonPanel panel = mask_after(snapshot, season, week);

  std::vector<SeasonSirFit> fits;
  for (int j = 0; j < panel.n_seasons(); ++j) {
    const int other = panel.seasons[static_cast<std::size_t>(j)];
    if (other == season) continue;
    fits.push_back(fit_sir_to_season(other, panel.values.row(j).transpose()));
  }
  const TruncatedMvnPrior prior = fit_prior(fits, season);

  SamplerConfig sampler = rc.sampler();
  sampler.seed = cell_seed(rc.seed, season, week);
  const PosteriorDraws draws = sample_posterior(panel, prior, rc.data, rc.hyper, sampler);
  const PredictiveTrajectorySet pred =
      predictive_simulate(draws, panel, season, week, rc.data.lambda,
                          Rng::derive_seed(sampler.seed, 0x9d5u, static_cast<std::uint64_t>(week)));

  fs::create_directories(rc.out_dir);
  write_fits(fits, (fs::path(rc.out_dir) / "sir_fits.csv").string());
  write_prior(prior, (fs::path(rc.out_dir) / "prior.txt").string());
  write_submission(all_target_forecasts(pred, rc.baseline, rc.probability_floor),
                   (fs::path(rc.out_dir) / "submission.csv").string());
  write_intervals(pred, 0.95, (fs::path(rc.out_dir) / "intervals.csv").string());
  write_convergence_report(draws, (fs::path(rc.out_dir) / "convergence.txt").string());
  if (rc.save_draws) write_draws(draws, (fs::path(rc.out_dir) / "draws.csv").string());
  finish_manifest(std::move(manifest), rc.out_dir);
  std::cout << "forecast " << season << "." << week << " written to " << rc.out_dir;
  if (draws.convergence.computed) std::cout << " (max R-hat " << draws.convergence.max_rhat << ")";
  std::cout << "\n";
  return 0;
}

int cmd_backtest(const RunConfig& rc, const std::string& config_path) {
  RunManifest manifest = start_manifest("backtest", config_path, rc);
  const VintageStore store = load_store(rc);
  BacktestPlan plan;
  plan.seasons = rc.backtest_seasons;
  plan.week_from = rc.week_from;
  plan.week_to = rc.week_to;
  plan.sampler = rc.sampler();
  plan.data = rc.data;
  plan.hyper = rc.hyper;
  plan.baseline = rc.baseline;
  plan.probability_floor = rc.probability_floor;
  plan.faithful_vintage = rc.vintage == "faithful";
  plan.workers = rc.workers;
  plan.save_draws = rc.save_draws;
  plan.base_seed = rc.seed;
  const BacktestResult result = run_backtest(plan, store, rc.out_dir);
  finish_manifest(std::move(manifest), rc.out_dir);
  std::cout << "backtest: " << result.n_completed() << " cells complete, " << result.n_failed() << " failed\n";
  for (const auto& cell : result.cells) {
    if (!cell.ok && !cell.skipped) {
      std::cout << "  failed " << cell.season << "." << cell.week << ": " << cell.error << "\n";
    }
  }
  return result.n_failed() == 0 ? 0 : 1;
}

std::vector<SubmissionEntry> read_backtest_submissions(const std::string& backtest_dir, int season, int weeks) {
  std::vector<SubmissionEntry> entries;
  const fs::path cells = fs::path(backtest_dir) / "cells";
  if (!fs::exists(cells)) throw UsageError("no cells/ directory under " + backtest_dir);
  for (const auto& entry : fs::directory_iterator(cells)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind(std::to_string(season) + ".", 0) != 0) continue;
    const int week = std::stoi(name.substr(name.find('.') + 1));
    const CsvTable table = read_csv((entry.path() / "submission.csv").string());
    const int ct = table.column("target"), cbs = table.column("bin_start"), cp = table.column("probability");
    std::map<std::string, SubmissionEntry> per_target;
    for (const auto& row : table.rows) {
      const ForecastTarget target = target_from_name(row[ct]);
      auto& e = per_target[row[ct]];
      if (e.forecast.probs.size() == 0) {
        e.model = "db";
        e.forecast.target = target;
        e.forecast.submission_week = week;
        const int bins = target == ForecastTarget::PT ? weeks
                         : target == ForecastTarget::Onset ? weeks + 1
                                                           : kIntensityBins;
        e.forecast.probs = Eigen::VectorXd::Zero(bins);
      }
      int bin;
      if (target == ForecastTarget::PT || target == ForecastTarget::Onset) {
        bin = row[cbs] == "none" ? weeks : std::stoi(row[cbs]) - 1;
      } else {
        bin = intensity_bin(std::stod(row[cbs]));
      }
      e.forecast.probs(bin) += std::stod(row[cp]);
    }
    for (auto& [key, e] : per_target) entries.push_back(std::move(e));
  }
  if (entries.empty()) throw UsageError("no submissions for season " + std::to_string(season) + " under " + backtest_dir);
  return entries;
}

int cmd_score(const RunConfig& rc, const std::string& config_path, const std::string& submissions,
              const std::string& backtest_dir, int season) {
  RunManifest manifest = start_manifest("score", config_path, rc);
  const SeasonPanel panel = load_panel(rc);
  const int j = panel.index_of(season);
  if (j < 0) throw UsageError("truth season " + std::to_string(season) + " not in panel");
  const TruthResolution truth = resolve_truth(panel.values.row(j).transpose(), rc.baseline);

  std::vector<SubmissionEntry> entries;
  if (!submissions.empty()) {
    require_file(submissions, "submissions file");
    entries = read_submissions(submissions, panel.weeks());
  } else if (!backtest_dir.empty()) {
    entries = read_backtest_submissions(backtest_dir, season, panel.weeks());
  } else {
    throw UsageError("score needs --submissions <file> or --backtest <dir>");
  }
  const TargetScores scores = score_submission_set(entries, truth);
  fs::create_directories(rc.out_dir);
  write_scores(scores, (fs::path(rc.out_dir) / "scores.csv").string());
  std::ofstream records((fs::path(rc.out_dir) / "score_records.csv").string());
  records << "model,week,target,log_score,truth_bin,flag\n";
  for (const auto& r : scores.records) {
    records << r.model << ',' << r.submission_week << ',' << target_name(r.target) << ','
            << format_double(r.score) << ',' << r.truth_bin << ",\"" << r.flag << "\"\n";
  }
  finish_manifest(std::move(manifest), rc.out_dir);
  for (const auto& [model, overall] : scores.overall) {
    std::cout << model << " overall mean log score: " << overall << "\n";
  }
  return 0;
}

int cmd_coverage(const RunConfig& rc, const std::string& config_path, const std::string& backtest_dir) {
  RunManifest manifest = start_manifest("coverage", config_path, rc);
  const SeasonPanel truth = load_panel(rc);
  const CoverageReport report = coverage_report(backtest_dir, truth, 0.95);
  fs::create_directories(rc.out_dir);
  write_coverage_report(report, (fs::path(rc.out_dir) / "coverage.csv").string());
  finish_manifest(std::move(manifest), rc.out_dir);
  std::cout << "coverage: " << report.inside << "/" << report.total << " = " << report.overall() << "\n";
  return 0;
}

int cmd_plotdata(const RunConfig& rc, const std::string& config_path, const std::string& what,
                 const std::string& backtest_dir, int season, const std::string& scores_file) {
  RunManifest manifest = start_manifest("plotdata", config_path, rc);
  const std::string out = rc.out_dir;
  if (what == "wili") {
    emit_wili_plotdata(load_panel(rc), out);
  } else if (what == "typicality") {
    emit_typicality_plotdata(load_panel(rc), out);
  } else if (what == "sirfit") {
    const SeasonPanel panel = load_panel(rc);
    emit_sirfit_plotdata(panel, fit_all_seasons(panel), out);
  } else if (what == "forecast") {
    if (backtest_dir.empty()) throw UsageError("plotdata forecast needs --backtest <dir>");
    emit_forecast_plotdata(backtest_dir, season, out);
  } else if (what == "coverage") {
    if (backtest_dir.empty()) throw UsageError("plotdata coverage needs --backtest <dir>");
    emit_coverage_plotdata(coverage_report(backtest_dir, load_panel(rc), 0.95), out);
  } else if (what == "scores") {
    if (scores_file.empty()) throw UsageError("plotdata scores needs --scores <file>");
    require_file(scores_file, "scores file");
    const CsvTable table = read_csv(scores_file);
    const int cm = table.column("model"), ct = table.column("target"), cs = table.column("mean_log_score");
    if (cm < 0 || ct < 0 || cs < 0) throw UsageError("scores file must have model,target,mean_log_score");
    TargetScores scores;
    for (const auto& row : table.rows) {
      if (row[ct] == "logscore") {
        scores.overall[row[cm]] = std::stod(row[cs]);
      } else {
        scores.per_model_target[row[cm]][row[ct]] = std::stod(row[cs]);
      }
    }
    emit_score_plotdata(scores, out);
  } else {
    throw UsageError("unknown plotdata kind '" + what + "'");
  }
  finish_manifest(std::move(manifest), out);
  std::cout << "plotdata '" << what << "' written to " << out << "\n";
  return 0;
}

int cmd_fetch(const RunConfig& rc, const std::string& config_path, int from, int to, int issue,
              const std::string& region, const std::string& append_to, bool offline) {
  RunManifest manifest = start_manifest("fetch", config_path, rc);
  FetchOptions opts;
  opts.endpoint = rc.api_endpoint;
  if (const char* env = std::getenv("DBFLU_API_ENDPOINT")) opts.endpoint = env;
  opts.region = region;
  opts.epiweek_from = from;
  opts.epiweek_to = to;
  opts.issue = issue;
  opts.cache_dir = rc.cache_dir;
  opts.offline = offline;
  const FetchResult result = fetch_surveillance(opts);
  std::cout << "fetched " << result.rows.size() << " rows" << (result.from_cache ? " (cache)" : " (network)")
            << " -> " << result.cache_path << "\n";
  if (!append_to.empty()) {
    append_rows_to_panel_csv(result.rows, append_to);
    std::cout << "appended to " << append_to << "\n";
  }
  finish_manifest(std::move(manifest), rc.cache_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dbflu: dynamic Bayesian influenza forecasting"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  std::string config_path, out_override, mode_override, vintage_override, data_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_override, "output directory");
  app.add_option("--mode", mode_override, "sampler mode: diagnostic | production | ci");
  app.add_option("--vintage", vintage_override, "data vintage policy: final | faithful");
  app.add_option("--data", data_override, "panel CSV (overrides config data_file)");
  app.add_option("--seed", seed_override, "base RNG seed")->each([&](const std::string&) { seed_set = true; });

  auto* fit_priors = app.add_subcommand("fit-priors", "fit per-season SIR curves and empirical priors");
  int season = 2015, week = 3;
  auto* forecast = app.add_subcommand("forecast", "fit one Season.Week model and emit submissions");
  forecast->add_option("--season", season, "target season")->required();
  forecast->add_option("--week", week, "last observed season-week")->required();
  auto* backtest = app.add_subcommand("backtest", "leave-one-season-out sequential forecasts");
  std::string submissions_file, backtest_dir, scores_file, what = "wili", append_to, region = "nat";
  auto* score = app.add_subcommand("score", "log-score submissions against resolved truth");
  score->add_option("--submissions", submissions_file, "external submissions table");
  score->add_option("--backtest", backtest_dir, "completed backtest directory");
  score->add_option("--season", season, "truth season")->required();
  auto* coverage = app.add_subcommand("coverage", "predictive-interval coverage over a backtest");
  coverage->add_option("--backtest", backtest_dir, "completed backtest directory")->required();
  auto* plotdata = app.add_subcommand("plotdata", "tidy tables and charts");
  plotdata->add_option("--what", what, "wili | typicality | sirfit | forecast | coverage | scores");
  plotdata->add_option("--backtest", backtest_dir, "backtest directory (forecast/coverage)");
  plotdata->add_option("--season", season, "season (forecast fans)");
  plotdata->add_option("--scores", scores_file, "scores table (scores)");
  int ew_from = 0, ew_to = 0, issue = -1;
  bool offline = false;
  auto* fetch = app.add_subcommand("fetch", "download surveillance data into the local cache");
  fetch->add_option("--from", ew_from, "first epiweek (YYYYWW)")->required();
  fetch->add_option("--to", ew_to, "last epiweek (YYYYWW)")->required();
  fetch->add_option("--issue", issue, "issue week (YYYYWW); omit for latest");
  fetch->add_option("--region", region, "surveillance region");
  fetch->add_option("--append-to", append_to, "panel CSV to append rows to");
  fetch->add_flag("--offline", offline, "serve from cache only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig rc;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
      rc = RunConfig::from_config(Config::load(config_path));
    }
    if (!out_override.empty()) rc.out_dir = out_override;
    if (!mode_override.empty()) rc.mode = mode_override;
    if (!vintage_override.empty()) rc.vintage = vintage_override;
    if (!data_override.empty()) rc.data_file = data_override;
    if (seed_set) rc.seed = seed_override;
    if (rc.mode != "diagnostic" && rc.mode != "production" && rc.mode != "ci") {
      throw UsageError("unknown mode '" + rc.mode + "'");
    }
    if (rc.vintage != "final" && rc.vintage != "faithful") {
      throw UsageError("unknown vintage policy '" + rc.vintage + "'");
    }

    if (fit_priors->parsed()) return cmd_fit_priors(rc, config_path);
    if (forecast->parsed()) return cmd_forecast(rc, config_path, season, week);
    if (backtest->parsed()) return cmd_backtest(rc, config_path);
    if (score->parsed()) return cmd_score(rc, config_path, submissions_file, backtest_dir, season);
    if (coverage->parsed()) return cmd_coverage(rc, config_path, backtest_dir);
    if (plotdata->parsed()) return cmd_plotdata(rc, config_path, what, backtest_dir, season, scores_file);
    if (fetch->parsed()) return cmd_fetch(rc, config_path, ew_from, ew_to, issue, region, append_to, offline);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
