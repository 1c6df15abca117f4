#include "dbflu/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "dbflu/csv.hpp"

namespace dbflu {

double log_score(const Eigen::VectorXd& probs, int truth_index, int ordinal_count) {
  const int n = static_cast<int>(probs.size());
  if (n < 1) throw std::invalid_argument("log_score: empty probability vector");
  if (truth_index < 0 || truth_index >= n) throw std::invalid_argument("log_score: truth index out of range");
  const int ordinal = ordinal_count < 0 ? n : ordinal_count;

  double mass = probs(truth_index);
  if (truth_index < ordinal) {
    if (truth_index - 1 >= 0) mass += probs(truth_index - 1);
    if (truth_index + 1 < ordinal) mass += probs(truth_index + 1);
  }
  if (!(mass > 0.0)) return kScoreFloor;
  return std::max(std::log(mass), kScoreFloor);
}

std::optional<int> TruthResolution::k_ahead_bin(int submission_week, int k) const {
  const int week = submission_week + k;
  if (week < 1 || week > weeks) return std::nullopt;
  return intensity_bin(final_values(week - 1));
}

int TruthResolution::bin_for(ForecastTarget target, int submission_week) const {
  switch (target) {
    case ForecastTarget::PI: return pi_bin;
    case ForecastTarget::PT: return pt_bin;
    case ForecastTarget::Onset: return onset_bin;
    default: {
      const int k = static_cast<int>(target) - static_cast<int>(ForecastTarget::Wk1) + 1;
      const auto bin = k_ahead_bin(submission_week, k);
      if (!bin) throw std::runtime_error("TruthResolution: k-ahead truth undefined for week " + std::to_string(submission_week));
      return *bin;
    }
  }
}

TruthResolution resolve_truth(const Eigen::VectorXd& final_season, double baseline) {
  const int T = static_cast<int>(final_season.size());
  std::string missing;
  for (int t = 0; t < T; ++t) {
    if (!std::isfinite(final_season(t))) missing += (missing.empty() ? "" : ", ") + std::to_string(t + 1);
  }
  if (!missing.empty()) throw std::runtime_error("resolve_truth: season incomplete; missing weeks " + missing);

  TruthResolution truth;
  truth.weeks = T;
  truth.baseline = baseline;
  truth.final_values = final_season;
  const SeasonTargets targets = compute_targets(final_season, baseline);
  truth.pi_bin = intensity_bin(targets.peak_intensity);
  truth.pt_bin = targets.peak_week - 1;
  truth.onset_bin = targets.onset_week ? *targets.onset_week - 1 : T;
  return truth;
}

ScoreRecord score_entry(const SubmissionEntry& entry, const TruthResolution& truth) {
  ScoreRecord rec;
  rec.model = entry.model;
  rec.submission_week = entry.forecast.submission_week;
  rec.target = entry.forecast.target;

  const Eigen::VectorXd& p = entry.forecast.probs;
  if (entry.late) {
    rec.score = kScoreFloor;
    rec.flagged = true;
    rec.flag = "late submission";
    return rec;
  }
  rec.truth_bin = truth.bin_for(entry.forecast.target, entry.forecast.submission_week);
  if ((p.array() < 0.0).any() || !p.allFinite()) {
    rec.score = kScoreFloor;
    rec.flagged = true;
    rec.flag = "malformed probability vector";
    return rec;
  }
  if (p.sum() > 1.1) {
    rec.score = kScoreFloor;
    rec.flagged = true;
    rec.flag = "probabilities sum above 1.1";
    return rec;
  }
  const bool onset = entry.forecast.target == ForecastTarget::Onset;
  const int ordinal = onset ? static_cast<int>(p.size()) - 1 : -1;
  rec.score = log_score(p, rec.truth_bin, ordinal);
  if (onset && (rec.truth_bin >= ordinal - 1)) {
    // The categorical no-onset rule binds: either the truth is "no onset"
    // (exact-bin credit only) or the truth is the last week and the no-onset
    // bin is excluded from neighbor credit.
    rec.flagged = true;
    rec.flag = "no-onset neighbor rule applied";
  }
  return rec;
}

TargetScores score_submission_set(const std::vector<SubmissionEntry>& submissions, const TruthResolution& truth) {
  TargetScores out;
  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
  for (const auto& entry : submissions) {
    const ScoreRecord rec = score_entry(entry, truth);
    out.records.push_back(rec);
    auto& cell = sums[rec.model][target_name(rec.target)];
    cell.first += rec.score;
    cell.second += 1;
  }
  for (const auto& [model, by_target] : sums) {
    double total = 0.0;
    for (const auto& [target, cell] : by_target) {
      const double mean = cell.first / cell.second;
      out.per_model_target[model][target] = mean;
      total += mean;
    }
    out.overall[model] = total / static_cast<double>(by_target.size());
  }
  return out;
}

std::vector<SubmissionEntry> read_submissions(const std::string& path, int weeks) {
  const CsvTable table = read_csv(path);
  const int cm = table.column("model"), cw = table.column("week"), ct = table.column("target"),
            cbs = table.column("bin_start"), cbe = table.column("bin_end"), cp = table.column("probability");
  if (cm < 0 || cw < 0 || ct < 0 || cbs < 0 || cbe < 0 || cp < 0) {
    throw std::runtime_error("read_submissions: expected header model,week,target,bin_start,bin_end,probability in " + path);
  }
  const int cl = table.column("late");

  // Group rows into one probability vector per (model, week, target).
  std::map<std::tuple<std::string, int, std::string>, SubmissionEntry> grouped;
  for (const auto& row : table.rows) {
    const std::string model = row[cm];
    const int week = std::stoi(row[cw]);
    const std::string target_str = row[ct];
    const ForecastTarget target = target_from_name(target_str);
    auto key = std::make_tuple(model, week, target_str);
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      SubmissionEntry entry;
      entry.model = model;
      entry.forecast.target = target;
      entry.forecast.submission_week = week;
      const int bins = target == ForecastTarget::PT ? weeks : (target == ForecastTarget::Onset ? weeks + 1 : kIntensityBins);
      entry.forecast.probs = Eigen::VectorXd::Zero(bins);
      it = grouped.emplace(key, std::move(entry)).first;
    }
    SubmissionEntry& entry = it->second;
    if (cl >= 0 && !row[cl].empty() && row[cl] != "0") entry.late = true;

    int bin = -1;
    if (target == ForecastTarget::PT || target == ForecastTarget::Onset) {
      if (row[cbs] == "none") {
        bin = weeks;  // only valid for onset
        if (target != ForecastTarget::Onset) throw std::runtime_error("read_submissions: 'none' bin on non-onset target");
      } else {
        bin = std::stoi(row[cbs]) - 1;
      }
    } else {
      bin = intensity_bin(std::stod(row[cbs]));
    }
    if (bin < 0 || bin >= entry.forecast.probs.size()) {
      throw std::runtime_error("read_submissions: bin outside scheme in " + path);
    }
    entry.forecast.probs(bin) += std::stod(row[cp]);
  }

  std::vector<SubmissionEntry> out;
  out.reserve(grouped.size());
  for (auto& [key, entry] : grouped) out.push_back(std::move(entry));
  return out;
}

void write_scores(const TargetScores& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_scores: cannot open " + path);
  out << "model,target,mean_log_score\n";
  for (const auto& [model, by_target] : scores.per_model_target) {
    for (const auto& [target, mean] : by_target) {
      out << model << ',' << target << ',' << format_double(mean) << '\n';
    }
    out << model << ",logscore," << format_double(scores.overall.at(model)) << '\n';
  }
}

}  // namespace dbflu
