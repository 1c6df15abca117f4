#include "dbflu/priors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dbflu/csv.hpp"
#include "dbflu/math.hpp"
#include "dbflu/optim.hpp"

namespace dbflu {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed multistart grid over the truncation box (i0, beta, rho).
constexpr std::array<std::array<double, 3>, 10> kStarts = {{
    {5e-4, 0.6, 0.55},
    {5e-4, 1.2, 0.75},
    {5e-4, 2.4, 0.87},
    {2e-3, 0.6, 0.75},
    {2e-3, 1.2, 0.87},
    {2e-3, 2.4, 0.55},
    {8e-3, 0.6, 0.87},
    {8e-3, 1.2, 0.55},
    {8e-3, 2.4, 0.75},
    {4e-3, 0.8, 0.69},
}};

// Optimization runs on unconstrained coordinates: scaled logits for the
// bounded parameters and a logit over (0, beta_max) for beta.
Eigen::Vector3d to_unconstrained(double i0, double beta, double rho, double beta_max) {
  return {logit(i0 / kPriorI0Max), logit(beta / beta_max), logit(rho / kPriorRhoMax)};
}

std::array<double, 3> from_unconstrained(const Eigen::VectorXd& u, double beta_max) {
  return {kPriorI0Max * inv_logit(u(0)), beta_max * inv_logit(u(1)), kPriorRhoMax * inv_logit(u(2))};
}

}  // namespace

bool TruncatedMvnPrior::in_bounds(double i0, double beta, double rho) const {
  return i0 > 0.0 && i0 < kPriorI0Max && beta > 0.0 && rho > 0.0 && rho < kPriorRhoMax;
}

void TruncatedMvnPrior::build_cache() const {
  Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success) throw SingularCovariance("TruncatedMvnPrior: covariance not positive-definite");
  chol_ = llt.matrixL();
  prec_ = llt.solve(Eigen::Matrix3d::Identity());
  cached_ = true;
}

const Eigen::Matrix3d& TruncatedMvnPrior::chol_lower() const {
  if (!cached_) build_cache();
  return chol_;
}

const Eigen::Matrix3d& TruncatedMvnPrior::precision() const {
  if (!cached_) build_cache();
  return prec_;
}

double TruncatedMvnPrior::log_density(double i0, double beta, double rho) const {
  if (!in_bounds(i0, beta, rho)) return -kInf;
  const Eigen::Vector3d d = Eigen::Vector3d(i0, beta, rho) - mean;
  const Eigen::Matrix3d& L = chol_lower();
  double log_det = 0.0;
  for (int i = 0; i < 3; ++i) log_det += std::log(L(i, i));
  const double quad = d.dot(precision() * d);
  return -0.5 * quad - log_det - 1.5 * std::log(2.0 * M_PI);
}

SeasonSirFit fit_sir_to_season(int season, const Eigen::VectorXd& wili, const SirFitOptions& opts) {
  const int weeks = static_cast<int>(wili.size());
  int observed = 0;
  for (int t = 0; t < weeks; ++t) {
    if (std::isfinite(wili(t))) {
      if (!(wili(t) > 0.0 && wili(t) < 1.0)) throw std::invalid_argument("fit_sir_to_season: observations must lie in (0,1)");
      ++observed;
    }
  }
  if (observed < opts.min_observed_weeks) {
    throw std::invalid_argument("fit_sir_to_season: need at least " + std::to_string(opts.min_observed_weeks) + " observed weeks");
  }

  const auto objective = [&](const Eigen::VectorXd& u) -> double {
    const auto [i0, beta, rho] = from_unconstrained(u, opts.beta_max);
    if (!(i0 > 0.0) || !(beta > 0.0) || !(rho > 0.0)) return kInf;
    try {
      const SirTrajectory traj = solve_sir(SirParams(opts.s0, i0, beta, rho), weeks);
      double sse = 0.0;
      for (int t = 0; t < weeks; ++t) {
        if (!std::isfinite(wili(t))) continue;
        const double e = wili(t) - traj.i(t);
        sse += e * e;
      }
      return sse;
    } catch (const std::exception&) {
      return kInf;
    }
  };

  bool have_best = false;
  double best_sse = kInf;
  std::array<double, 3> best_triple{};
  for (const auto& start : kStarts) {
    NelderMeadOptions nm;
    nm.max_iterations = 4000;
    const auto res = nelder_mead(objective, to_unconstrained(start[0], start[1], start[2], opts.beta_max), nm);
    if (!std::isfinite(res.value)) continue;
    const auto triple = from_unconstrained(res.x, opts.beta_max);
    if (!std::isfinite(triple[0]) || !std::isfinite(triple[1]) || !std::isfinite(triple[2])) continue;
    if (res.value < best_sse || (res.value == best_sse && triple[1] < best_triple[1])) {
      best_sse = res.value;
      best_triple = triple;
      have_best = true;
    }
  }
  if (!have_best) throw OptimizationFailed("fit_sir_to_season: no feasible fit from any start");
  return SeasonSirFit{season, SirParams(opts.s0, best_triple[0], best_triple[1], best_triple[2]), best_sse};
}

TruncatedMvnPrior fit_prior(const std::vector<SeasonSirFit>& fits, int exclude_season) {
  std::vector<Eigen::Vector3d> x;
  for (const auto& f : fits) {
    if (f.season == exclude_season) continue;
    x.emplace_back(f.params.i0, f.params.beta, f.params.rho);
  }
  const int n = static_cast<int>(x.size());
  if (n < 3) throw std::invalid_argument("fit_prior: need at least 3 included fits");

  TruncatedMvnPrior prior;
  prior.mean.setZero();
  for (const auto& v : x) prior.mean += v;
  prior.mean /= static_cast<double>(n);
  prior.cov.setZero();
  for (const auto& v : x) {
    const Eigen::Vector3d d = v - prior.mean;
    prior.cov += d * d.transpose();
  }
  prior.cov /= static_cast<double>(n - 1);

  // Positive-definite with a meaningful spread; a rank-deficient covariance
  // (e.g. identical fits) is not rescued by the one-shot jitter.
  const auto min_eig = [](const Eigen::Matrix3d& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues().minCoeff();
  };
  if (min_eig(prior.cov) <= 1e-9) {
    prior.cov += 1e-10 * Eigen::Matrix3d::Identity();
    if (min_eig(prior.cov) <= 1e-9) throw SingularCovariance("fit_prior: sample covariance not positive-definite");
  }
  return prior;
}

std::array<double, 3> sample_prior(const TruncatedMvnPrior& prior, Rng& rng) {
  const Eigen::Matrix3d& L = prior.chol_lower();
  for (long attempt = 0; attempt < 1000000; ++attempt) {
    const Eigen::VectorXd draw = mvn_sample(prior.mean, L, rng);
    if (prior.in_bounds(draw(0), draw(1), draw(2))) return {draw(0), draw(1), draw(2)};
  }
  throw RejectionExhausted("sample_prior: 1e6 consecutive rejections; prior mass outside bounds");
}

SirParams params_from_draw(const std::array<double, 3>& draw, double s0) {
  return SirParams(s0, draw[0], draw[1], draw[2]);
}

void write_fits(const std::vector<SeasonSirFit>& fits, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_fits: cannot open " + path);
  out << "season,i0,beta,rho,sse\n";
  for (const auto& f : fits) {
    out << f.season << ',' << format_double(f.params.i0) << ',' << format_double(f.params.beta) << ','
        << format_double(f.params.rho) << ',' << format_double(f.sse) << '\n';
  }
}

std::vector<SeasonSirFit> read_fits(const std::string& path) {
  const CsvTable table = read_csv(path);
  const int cs = table.column("season"), ci = table.column("i0"), cb = table.column("beta"),
            cr = table.column("rho"), ce = table.column("sse");
  if (cs < 0 || ci < 0 || cb < 0 || cr < 0 || ce < 0) throw std::runtime_error("read_fits: bad header in " + path);
  std::vector<SeasonSirFit> fits;
  for (const auto& row : table.rows) {
    fits.push_back({std::stoi(row[cs]),
                    SirParams(0.9, std::stod(row[ci]), std::stod(row[cb]), std::stod(row[cr])),
                    std::stod(row[ce])});
  }
  return fits;
}

void write_prior(const TruncatedMvnPrior& prior, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_prior: cannot open " + path);
  const char* names[3] = {"i0", "beta", "rho"};
  for (int i = 0; i < 3; ++i) out << "mean_" << names[i] << " = " << format_double(prior.mean(i)) << '\n';
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out << "cov_" << names[i] << '_' << names[j] << " = " << format_double(prior.cov(i, j)) << '\n';
    }
  }
  out << "bound_i0 = (0," << kPriorI0Max << ")\n";
  out << "bound_beta = (0,inf)\n";
  out << "bound_rho = (0," << kPriorRhoMax << ")\n";
}

TruncatedMvnPrior read_prior(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_prior: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  TruncatedMvnPrior prior;
  const char* names[3] = {"i0", "beta", "rho"};
  for (int i = 0; i < 3; ++i) prior.mean(i) = std::stod(kv.at(std::string("mean_") + names[i]));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      prior.cov(i, j) = std::stod(kv.at(std::string("cov_") + names[i] + "_" + names[j]));
    }
  }
  return prior;
}

}  // namespace dbflu
