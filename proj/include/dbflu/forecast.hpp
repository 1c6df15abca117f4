#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/mcmc.hpp"
#include "dbflu/panel.hpp"

namespace dbflu {

// CDC-challenge forecasting targets.
enum class ForecastTarget { PI, PT, Onset, Wk1, Wk2, Wk3, Wk4 };

inline constexpr std::array<ForecastTarget, 7> kAllTargets = {
    ForecastTarget::PI,  ForecastTarget::PT,  ForecastTarget::Onset, ForecastTarget::Wk1,
    ForecastTarget::Wk2, ForecastTarget::Wk3, ForecastTarget::Wk4};

std::string target_name(ForecastTarget t);
ForecastTarget target_from_name(const std::string& name);

// Intensity bin scheme: [0, 0.005), [0.005, 0.010), ..., [0.125, 0.13),
// plus the catch-all [0.13, 1]. 27 bins, half-open at the left edge.
inline constexpr int kIntensityBins = 27;
inline constexpr double kIntensityBinWidth = 0.005;
int intensity_bin(double value);

// Full-season wILI draws from the posterior predictive: observed weeks are
// fixed at their data values in every sample, unobserved weeks are simulated
// from the Beta data model under each draw's latent state.
struct PredictiveTrajectorySet {
  Eigen::MatrixXd samples;  // n_draws x weeks
  int target_season = 0;
  int observed_through = 0;           // season-week of the last used observation
  std::vector<bool> observed_weeks;   // which weeks were fixed

  int n_samples() const { return static_cast<int>(samples.rows()); }
  int weeks() const { return static_cast<int>(samples.cols()); }
};

// observed_through must lie in the challenge window [3, 30].
PredictiveTrajectorySet predictive_simulate(const PosteriorDraws& draws, const SeasonPanel& panel,
                                            int target_season, int observed_through, double lambda,
                                            std::uint64_t seed);

// Resolved targets of one full-season trajectory. Peak timing ties break to
// the earliest week; onset is the first week opening a run of three
// consecutive weeks strictly above baseline, if any. k-week-ahead values are
// reported relative to observed_through (0 disables them).
struct SeasonTargets {
  double peak_intensity = 0.0;
  int peak_week = 0;  // 1-based
  std::optional<int> onset_week;
  std::array<std::optional<double>, 4> week_ahead;
};

SeasonTargets compute_targets(const Eigen::VectorXd& trajectory, double baseline, int observed_through = 0);

// Probability vector over the target's bin scheme. Intensity targets use the
// 27-bin scheme; peak timing has one bin per week; onset appends a "no
// onset" bin. probs always sums to one.
struct BinnedForecast {
  ForecastTarget target = ForecastTarget::PI;
  int submission_week = 0;
  Eigen::VectorXd probs;
  std::string bin_scheme;
};

// probability_floor > 0 lifts every bin to at least that value and
// renormalizes (off by default; raw posterior frequencies are submitted).
BinnedForecast bin_forecast(const PredictiveTrajectorySet& samples, ForecastTarget target, double baseline,
                            double probability_floor = 0.0);

std::vector<BinnedForecast> all_target_forecasts(const PredictiveTrajectorySet& samples, double baseline,
                                                 double probability_floor = 0.0);

// Submission table: target, bin_start, bin_end, probability.
void write_submission(const std::vector<BinnedForecast>& forecasts, const std::string& path);

// Pointwise predictive summary per week: mean and equal-tailed interval.
void write_intervals(const PredictiveTrajectorySet& samples, double level, const std::string& path);

// Bin labels for week-indexed schemes ("none" marks the no-onset bin).
std::pair<std::string, std::string> bin_bounds_label(ForecastTarget target, int bin_index, int weeks);

}  // namespace dbflu
