#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dbflu/forecast.hpp"

namespace dbflu {

inline constexpr double kScoreFloor = -10.0;

// Challenge log score: ln of the probability mass on the truth bin and its
// immediate neighbors, neighbors clipped at the ends of the ordinal block.
// Bins at index >= ordinal_count are categorical and earn no neighbor
// credit (used for the "no onset" bin); ordinal_count < 0 treats the whole
// vector as ordinal. Zero mass in the credited bins scores the -10 floor.
double log_score(const Eigen::VectorXd& probs, int truth_index, int ordinal_count = -1);

struct ScoreRecord {
  std::string model;
  int submission_week = 0;
  ForecastTarget target = ForecastTarget::PI;
  double score = 0.0;  // in [-10, 0]
  int truth_bin = -1;
  bool flagged = false;
  std::string flag;
};

// One submitted probability vector, possibly from an external model.
struct SubmissionEntry {
  std::string model;
  BinnedForecast forecast;
  bool late = false;
};

// Truth bins resolved from a complete final-vintage season.
struct TruthResolution {
  int weeks = 0;
  double baseline = 0.0;
  Eigen::VectorXd final_values;
  int pi_bin = -1;
  int pt_bin = -1;     // 0-based week bin
  int onset_bin = -1;  // == weeks means "no onset"
  std::optional<int> k_ahead_bin(int submission_week, int k) const;
  int bin_for(ForecastTarget target, int submission_week) const;  // throws when undefined
};

TruthResolution resolve_truth(const Eigen::VectorXd& final_season, double baseline);

// Applies the challenge validity rules (-10 for late submissions, malformed
// vectors, probability sums above 1.1, or zero credited mass) and the
// ordinal/categorical neighbor policy per target.
ScoreRecord score_entry(const SubmissionEntry& entry, const TruthResolution& truth);

struct TargetScores {
  std::map<std::string, std::map<std::string, double>> per_model_target;  // model -> target -> mean
  std::map<std::string, double> overall;                                  // model -> mean over targets
  std::vector<ScoreRecord> records;
};

TargetScores score_submission_set(const std::vector<SubmissionEntry>& submissions, const TruthResolution& truth);

// External-submission table: model, week, target, bin_start, bin_end,
// probability. The no-onset bin is labelled "none".
std::vector<SubmissionEntry> read_submissions(const std::string& path, int weeks = kSeasonWeeks);
void write_scores(const TargetScores& scores, const std::string& path);

}  // namespace dbflu
