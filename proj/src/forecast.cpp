#include "dbflu/forecast.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dbflu/csv.hpp"
#include "dbflu/math.hpp"
#include "dbflu/rng.hpp"

namespace dbflu {

std::string target_name(ForecastTarget t) {
  switch (t) {
    case ForecastTarget::PI: return "pi";
    case ForecastTarget::PT: return "pt";
    case ForecastTarget::Onset: return "onset";
    case ForecastTarget::Wk1: return "1wk";
    case ForecastTarget::Wk2: return "2wk";
    case ForecastTarget::Wk3: return "3wk";
    case ForecastTarget::Wk4: return "4wk";
  }
  throw std::logic_error("target_name: unknown target");
}

ForecastTarget target_from_name(const std::string& name) {
  for (ForecastTarget t : kAllTargets) {
    if (target_name(t) == name) return t;
  }
  throw std::invalid_argument("target_from_name: unknown target '" + name + "'");
}

int intensity_bin(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("intensity_bin: value outside [0,1]");
  if (value >= 0.13) return kIntensityBins - 1;
  const int bin = static_cast<int>(std::floor(value / kIntensityBinWidth));
  return std::min(bin, kIntensityBins - 2);
}

PredictiveTrajectorySet predictive_simulate(const PosteriorDraws& draws, const SeasonPanel& panel,
                                            int target_season, int observed_through, double lambda,
                                            std::uint64_t seed) {
  if (observed_through < 3 || observed_through > 30) {
    throw std::invalid_argument("predictive_simulate: observed-through outside the challenge window [3,30]");
  }
  const int j = panel.index_of(target_season);
  if (j < 0) throw std::invalid_argument("predictive_simulate: target season not in panel");
  const int T = panel.weeks();
  const int n = draws.n_total();
  if (n < 1) throw std::invalid_argument("predictive_simulate: no posterior draws");

  PredictiveTrajectorySet out;
  out.target_season = target_season;
  out.observed_through = observed_through;
  out.samples.resize(n, T);
  out.observed_weeks.assign(static_cast<std::size_t>(T), false);
  for (int w = 1; w <= observed_through; ++w) {
    out.observed_weeks[static_cast<std::size_t>(w - 1)] = panel.observed(j, w);
  }

  for (int k = 0; k < n; ++k) {
    Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(k), 0xf0f0u));
    const ModelState& state = draws.draw(k);
    for (int t = 0; t < T; ++t) {
      if (out.observed_weeks[static_cast<std::size_t>(t)]) {
        out.samples(k, t) = panel.value(j, t + 1);
      } else {
        const double pi = state.pi(j, t);
        if (!(pi > 0.0 && pi < 1.0)) throw std::runtime_error("predictive_simulate: draw has pi outside (0,1)");
        out.samples(k, t) = rng.beta(lambda * pi, lambda * (1.0 - pi));
      }
    }
  }
  return out;
}

SeasonTargets compute_targets(const Eigen::VectorXd& trajectory, double baseline, int observed_through) {
  const int T = static_cast<int>(trajectory.size());
  SeasonTargets targets;
  targets.peak_intensity = trajectory(0);
  targets.peak_week = 1;
  for (int t = 1; t < T; ++t) {
    if (trajectory(t) > targets.peak_intensity) {
      targets.peak_intensity = trajectory(t);
      targets.peak_week = t + 1;
    }
  }
  for (int t = 0; t + 2 < T; ++t) {
    if (trajectory(t) > baseline && trajectory(t + 1) > baseline && trajectory(t + 2) > baseline) {
      targets.onset_week = t + 1;
      break;
    }
  }
  if (observed_through > 0) {
    for (int k = 1; k <= 4; ++k) {
      const int week = observed_through + k;
      if (week <= T) targets.week_ahead[static_cast<std::size_t>(k - 1)] = trajectory(week - 1);
    }
  }
  return targets;
}

namespace {

int bin_count(ForecastTarget target, int weeks) {
  switch (target) {
    case ForecastTarget::PT: return weeks;
    case ForecastTarget::Onset: return weeks + 1;  // trailing "no onset" bin
    default: return kIntensityBins;
  }
}

std::string scheme_name(ForecastTarget target, int weeks) {
  switch (target) {
    case ForecastTarget::PT: return "week-" + std::to_string(weeks);
    case ForecastTarget::Onset: return "onset-" + std::to_string(weeks + 1);
    default: return "intensity-27";
  }
}

}  // namespace

BinnedForecast bin_forecast(const PredictiveTrajectorySet& samples, ForecastTarget target, double baseline,
                            double probability_floor) {
  const int n = samples.n_samples();
  if (n < 500) throw std::invalid_argument("bin_forecast: need at least 500 predictive samples");
  const int T = samples.weeks();

  BinnedForecast out;
  out.target = target;
  out.submission_week = samples.observed_through;
  out.bin_scheme = scheme_name(target, T);
  out.probs = Eigen::VectorXd::Zero(bin_count(target, T));

  for (int k = 0; k < n; ++k) {
    const SeasonTargets t = compute_targets(samples.samples.row(k).transpose(), baseline, samples.observed_through);
    int bin = -1;
    switch (target) {
      case ForecastTarget::PI: bin = intensity_bin(t.peak_intensity); break;
      case ForecastTarget::PT: bin = t.peak_week - 1; break;
      case ForecastTarget::Onset: bin = t.onset_week ? *t.onset_week - 1 : T; break;
      default: {
        const int k_ahead = static_cast<int>(target) - static_cast<int>(ForecastTarget::Wk1) + 1;
        const auto& v = t.week_ahead[static_cast<std::size_t>(k_ahead - 1)];
        if (!v) throw std::invalid_argument("bin_forecast: " + std::to_string(k_ahead) +
                                            "-week-ahead target undefined at this submission week");
        bin = intensity_bin(*v);
        break;
      }
    }
    out.probs(bin) += 1.0;
  }
  out.probs /= static_cast<double>(n);
  if (probability_floor > 0.0) {
    out.probs = out.probs.cwiseMax(probability_floor);
    out.probs /= out.probs.sum();
  }
  return out;
}

std::vector<BinnedForecast> all_target_forecasts(const PredictiveTrajectorySet& samples, double baseline,
                                                 double probability_floor) {
  std::vector<BinnedForecast> out;
  for (ForecastTarget target : kAllTargets) {
    const int k_ahead = static_cast<int>(target) - static_cast<int>(ForecastTarget::Wk1) + 1;
    if (k_ahead >= 1 && samples.observed_through + k_ahead > samples.weeks()) continue;  // undefined: omitted
    out.push_back(bin_forecast(samples, target, baseline, probability_floor));
  }
  return out;
}

std::pair<std::string, std::string> bin_bounds_label(ForecastTarget target, int bin_index, int weeks) {
  if (target == ForecastTarget::PT || target == ForecastTarget::Onset) {
    if (target == ForecastTarget::Onset && bin_index == weeks) return {"none", "none"};
    return {std::to_string(bin_index + 1), std::to_string(bin_index + 2)};
  }
  if (bin_index == kIntensityBins - 1) return {format_double(0.13), format_double(1.0)};
  return {format_double(bin_index * kIntensityBinWidth), format_double((bin_index + 1) * kIntensityBinWidth)};
}

void write_submission(const std::vector<BinnedForecast>& forecasts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_submission: cannot open " + path);
  out << "target,bin_start,bin_end,probability\n";
  for (const auto& f : forecasts) {
    const int weeks = f.target == ForecastTarget::Onset ? static_cast<int>(f.probs.size()) - 1
                                                        : static_cast<int>(f.probs.size());
    for (Eigen::Index b = 0; b < f.probs.size(); ++b) {
      const auto [lo, hi] = bin_bounds_label(f.target, static_cast<int>(b), weeks);
      out << target_name(f.target) << ',' << lo << ',' << hi << ',' << format_double(f.probs(b)) << '\n';
    }
  }
}

void write_intervals(const PredictiveTrajectorySet& samples, double level, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_intervals: cannot open " + path);
  const double tail = (1.0 - level) / 2.0;
  out << "week,observed,mean,lo,hi,level\n";
  for (int t = 0; t < samples.weeks(); ++t) {
    const Eigen::VectorXd col = samples.samples.col(t);
    out << t + 1 << ',' << (samples.observed_weeks[static_cast<std::size_t>(t)] ? 1 : 0) << ','
        << format_double(col.mean()) << ',' << format_double(quantile(col, tail)) << ','
        << format_double(quantile(col, 1.0 - tail)) << ',' << format_double(level) << '\n';
  }
}

}  // namespace dbflu
