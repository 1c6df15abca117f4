#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dbflu/forecast.hpp"
#include "dbflu/rng.hpp"
#include "../helpers.hpp"

using namespace dbflu;

namespace {

// A hand-built predictive set: n samples of a given trajectory.
PredictiveTrajectorySet constant_set(const Eigen::VectorXd& traj, int n, int observed_through) {
  PredictiveTrajectorySet set;
  set.samples = traj.transpose().replicate(n, 1);
  set.observed_through = observed_through;
  set.target_season = 2015;
  set.observed_weeks.assign(static_cast<std::size_t>(traj.size()), false);
  for (int t = 0; t < observed_through; ++t) set.observed_weeks[static_cast<std::size_t>(t)] = true;
  return set;
}

}  // namespace

TEST_CASE("intensity binning matches the brute-force edge scan") {
  Rng rng(55);
  for (int k = 0; k < 10000; ++k) {
    const double v = rng.uniform();
    CHECK(intensity_bin(v) == oracle::intensity_bin_reference(v));
  }
  // Exact edges belong to the upper interval.
  CHECK(intensity_bin(0.0) == 0);
  CHECK(intensity_bin(0.005) == 1);
  CHECK(intensity_bin(0.03) == 6);
  CHECK(intensity_bin(0.0312) == 6);
  CHECK(intensity_bin(0.125) == 25);
  CHECK(intensity_bin(0.13) == 26);
  CHECK(intensity_bin(1.0) == 26);
  CHECK_THROWS_AS(intensity_bin(-0.1), std::invalid_argument);
}

TEST_CASE("every value lands in exactly one of the 27 bins") {
  Rng rng(56);
  for (int k = 0; k < 1000; ++k) {
    const int bin = intensity_bin(rng.uniform());
    CHECK(bin >= 0);
    CHECK(bin < kIntensityBins);
  }
}

TEST_CASE("compute_targets: peak, ties, onset, week-ahead values") {
  Eigen::VectorXd traj = Eigen::VectorXd::Constant(35, 0.01);
  traj(12) = 0.06;
  traj(19) = 0.06;  // tie: earliest wins
  const SeasonTargets t = compute_targets(traj, 0.021, 10);
  CHECK(t.peak_intensity == doctest::Approx(0.06));
  CHECK(t.peak_week == 13);
  CHECK_FALSE(t.onset_week.has_value());  // isolated spikes, no 3-week run
  CHECK(*t.week_ahead[0] == doctest::Approx(traj(10)));
  CHECK(*t.week_ahead[3] == doctest::Approx(traj(13)));
}

TEST_CASE("onset requires three consecutive weeks strictly above baseline") {
  const double baseline = 0.021;
  Eigen::VectorXd below = Eigen::VectorXd::Constant(35, 0.015);
  CHECK_FALSE(compute_targets(below, baseline).onset_week.has_value());

  // Two weeks above, a dip, then a real run later.
  Eigen::VectorXd dip = Eigen::VectorXd::Constant(35, 0.015);
  dip(4) = 0.03;
  dip(5) = 0.03;
  dip(6) = 0.01;
  dip(10) = 0.03;
  dip(11) = 0.03;
  dip(12) = 0.03;
  const auto onset = compute_targets(dip, baseline).onset_week;
  REQUIRE(onset.has_value());
  CHECK(*onset == 11);

  // Boundary: exactly 0.021 is not above.
  Eigen::VectorXd at = Eigen::VectorXd::Constant(35, baseline);
  CHECK_FALSE(compute_targets(at, baseline).onset_week.has_value());
}

TEST_CASE("onset agrees with brute-force run enumeration on random trajectories") {
  Rng rng(57);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> traj(35);
    Eigen::VectorXd v(35);
    for (int t = 0; t < 35; ++t) {
      traj[static_cast<std::size_t>(t)] = rng.uniform(0.0, 0.05);
      v(t) = traj[static_cast<std::size_t>(t)];
    }
    const auto got = compute_targets(v, 0.021).onset_week;
    const int expect = oracle::onset_reference(traj, 0.021);
    if (expect < 0) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(*got == expect);
    }
  }
}

TEST_CASE("bin_forecast: point mass lands in the right bin and sums to one") {
  Eigen::VectorXd traj = Eigen::VectorXd::Constant(35, 0.01);
  traj(15) = 0.0312;
  const auto set = constant_set(traj, 600, 10);
  const BinnedForecast pi = bin_forecast(set, ForecastTarget::PI, 0.021);
  CHECK(pi.probs.size() == kIntensityBins);
  CHECK(pi.probs(6) == doctest::Approx(1.0));  // [0.030, 0.035)
  CHECK(pi.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));

  for (ForecastTarget target : kAllTargets) {
    const BinnedForecast f = bin_forecast(set, target, 0.021);
    CHECK(f.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((f.probs.array() >= 0.0).all());
  }
  const BinnedForecast pt = bin_forecast(set, ForecastTarget::PT, 0.021);
  CHECK(pt.probs.size() == 35);
  CHECK(pt.probs(15) == doctest::Approx(1.0));
  const BinnedForecast onset = bin_forecast(set, ForecastTarget::Onset, 0.021);
  CHECK(onset.probs.size() == 36);
  CHECK(onset.probs(35) == doctest::Approx(1.0));  // no 3-week run anywhere
}

TEST_CASE("bin_forecast needs 500 samples; floor option renormalizes") {
  Eigen::VectorXd traj = Eigen::VectorXd::Constant(35, 0.01);
  CHECK_THROWS_AS(bin_forecast(constant_set(traj, 100, 10), ForecastTarget::PI, 0.021), std::invalid_argument);
  const BinnedForecast floored = bin_forecast(constant_set(traj, 600, 10), ForecastTarget::PI, 0.021, 1e-4);
  CHECK(floored.probs.minCoeff() > 0.0);
  CHECK(floored.probs.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("all_target_forecasts emits the seven challenge targets") {
  Eigen::VectorXd traj = Eigen::VectorXd::Constant(35, 0.03);
  const auto forecasts = all_target_forecasts(constant_set(traj, 600, 10), 0.021);
  CHECK(forecasts.size() == 7);
}

TEST_CASE("predictive_simulate fixes observed weeks and validates the window") {
  // Small synthetic posterior: one-season panel with three observed weeks.
  SeasonPanel panel;
  panel.seasons = {2015};
  panel.values = Eigen::MatrixXd::Constant(1, 35, std::numeric_limits<double>::quiet_NaN());
  panel.values(0, 0) = 0.011;
  panel.values(0, 1) = 0.012;
  panel.values(0, 2) = 0.013;

  PosteriorDraws draws;
  draws.seasons = panel.seasons;
  draws.chains.emplace_back();
  Rng rng(60);
  for (int k = 0; k < 700; ++k) {
    ModelState state(1, 35);
    state.set_sir(0, 0.004 + 0.001 * rng.uniform(), 0.9, 0.7);
    for (int t = 0; t < 35; ++t) state.set_mu(t, 0.0);
    draws.chains[0].push_back(state);
  }

  const auto set = predictive_simulate(draws, panel, 2015, 3, 4500.0, 999);
  CHECK(set.n_samples() == 700);
  for (int k = 0; k < set.n_samples(); ++k) {
    CHECK(set.samples(k, 0) == panel.values(0, 0));
    CHECK(set.samples(k, 1) == panel.values(0, 1));
    CHECK(set.samples(k, 2) == panel.values(0, 2));
    for (int t = 3; t < 35; ++t) {
      CHECK(set.samples(k, t) > 0.0);
      CHECK(set.samples(k, t) < 1.0);
    }
  }
  // Simulated columns vary across draws.
  CHECK(set.samples.col(10).maxCoeff() > set.samples.col(10).minCoeff());
  // Deterministic under the same seed.
  const auto set2 = predictive_simulate(draws, panel, 2015, 3, 4500.0, 999);
  CHECK((set.samples - set2.samples).norm() == 0.0);

  CHECK_THROWS_AS(predictive_simulate(draws, panel, 2015, 2, 4500.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(predictive_simulate(draws, panel, 2015, 31, 4500.0, 1), std::invalid_argument);
}

TEST_CASE("submission files carry every bin with labels") {
  namespace fs = std::filesystem;
  Eigen::VectorXd traj = Eigen::VectorXd::Constant(35, 0.03);
  const auto forecasts = all_target_forecasts(constant_set(traj, 600, 10), 0.021);
  const fs::path dir = fs::temp_directory_path() / "dbflu_forecast_tests";
  fs::create_directories(dir);
  write_submission(forecasts, (dir / "submission.csv").string());
  std::ifstream in(dir / "submission.csv");
  std::string line;
  int rows = 0;
  bool has_none = false;
  while (std::getline(in, line)) {
    if (line.find("onset,none,none,") != std::string::npos) has_none = true;
    ++rows;
  }
  CHECK(rows == 1 + 27 * 5 + 35 + 36);  // header + five intensity targets + pt + onset
  CHECK(has_none);
}
