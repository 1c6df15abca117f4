#pragma once

// Test-only reference implementations, kept independent of the library code
// they are used to check.

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Sir {
  double s, i, r;
};

// Generic fixed-step RK4 integration of the SIR equations, advancing one
// week using n_substeps internal steps. Written against the raw derivative
// form rather than the library's weekly stage recursion.
inline Sir integrate_sir_week(Sir y, double beta, double gamma, int n_substeps) {
  const double h = 1.0 / n_substeps;
  auto ds = [&](const Sir& u) { return -beta * u.s * u.i; };
  auto di = [&](const Sir& u) { return beta * u.s * u.i - gamma * u.i; };
  auto dr = [&](const Sir& u) { return gamma * u.i; };
  for (int step = 0; step < n_substeps; ++step) {
    const Sir k1{ds(y), di(y), dr(y)};
    const Sir y2{y.s + 0.5 * h * k1.s, y.i + 0.5 * h * k1.i, y.r + 0.5 * h * k1.r};
    const Sir k2{ds(y2), di(y2), dr(y2)};
    const Sir y3{y.s + 0.5 * h * k2.s, y.i + 0.5 * h * k2.i, y.r + 0.5 * h * k2.r};
    const Sir k3{ds(y3), di(y3), dr(y3)};
    const Sir y4{y.s + h * k3.s, y.i + h * k3.i, y.r + h * k3.r};
    const Sir k4{ds(y4), di(y4), dr(y4)};
    y.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    y.i += h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i);
    y.r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  }
  return y;
}

inline std::vector<Sir> integrate_sir_weeks(Sir y0, double beta, double gamma, int weeks, int n_substeps) {
  std::vector<Sir> out{y0};
  for (int w = 1; w < weeks; ++w) out.push_back(integrate_sir_week(out.back(), beta, gamma, n_substeps));
  return out;
}

// Day-by-day civil calendar walked forward from a fixed anchor
// (1990-01-01 was a Monday), independent of any days-from-epoch formula.
class CivilWalker {
 public:
  struct Date {
    int y, m, d;
    int dow;  // 0 = Sunday
    bool operator<(const Date& o) const {
      return y != o.y ? y < o.y : (m != o.m ? m < o.m : d < o.d);
    }
    bool operator==(const Date& o) const { return y == o.y && m == o.m && d == o.d; }
  };

  static bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }
  static int days_in_month(int y, int m) {
    static const int dm[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : dm[m - 1];
  }

  static Date next(Date d) {
    ++d.d;
    if (d.d > days_in_month(d.y, d.m)) {
      d.d = 1;
      ++d.m;
      if (d.m > 12) {
        d.m = 1;
        ++d.y;
      }
    }
    d.dow = (d.dow + 1) % 7;
    return d;
  }
};

// Brute-force MMWR calendar over a year range: assigns every day its MMWR
// (year, week) by the "week 1 contains January 4th, weeks start Sunday"
// rule, then reports week counts per year.
class MmwrOracle {
 public:
  explicit MmwrOracle(int from_year = 1990, int to_year = 2030) {
    CivilWalker::Date d{1990, 1, 1, 1};  // Monday
    std::vector<CivilWalker::Date> days;
    while (d.y <= to_year + 1) {
      days.push_back(d);
      d = CivilWalker::next(d);
    }
    // Sunday starts of MMWR year Y: the Sunday of the week containing Jan 4.
    std::map<int, std::size_t> year_start;
    for (std::size_t idx = 0; idx < days.size(); ++idx) {
      const auto& day = days[idx];
      if (day.dow != 0) continue;
      // does [day .. day+6] contain Jan 4 of some year?
      for (int off = 0; off < 7; ++off) {
        const auto& probe = days[idx + off];
        if (probe.m == 1 && probe.d == 4) year_start[probe.y] = idx;
      }
      if (idx + 7 >= days.size()) break;
    }
    for (int y = from_year; y <= to_year; ++y) {
      const auto it = year_start.find(y);
      const auto it2 = year_start.find(y + 1);
      if (it == year_start.end() || it2 == year_start.end()) continue;
      weeks_in_year_[y] = static_cast<int>((it2->second - it->second) / 7);
    }
  }

  int weeks_in_year(int y) const { return weeks_in_year_.at(y); }

 private:
  std::map<int, int> weeks_in_year_;
};

// Direct-formula densities using tgamma (the library uses lgamma sums).
inline double gamma_pdf_reference(double x, double shape, double rate) {
  return std::pow(rate, shape) / std::tgamma(shape) * std::pow(x, shape - 1.0) * std::exp(-rate * x);
}

inline double beta_pdf_reference(double y, double a, double b) {
  const double norm = std::tgamma(a + b) / (std::tgamma(a) * std::tgamma(b));
  return norm * std::pow(y, a - 1.0) * std::pow(1.0 - y, b - 1.0);
}

// Brute-force intensity binning by scanning an explicit edge list.
inline int intensity_bin_reference(double v) {
  std::vector<double> edges;
  for (int i = 0; i <= 26; ++i) edges.push_back(0.005 * i);
  edges.push_back(1.0 + 1e-12);
  edges[26] = 0.13;
  for (int b = 0; b < 27; ++b) {
    if (v >= edges[static_cast<std::size_t>(b)] && v < edges[static_cast<std::size_t>(b + 1)]) return b;
  }
  return 26;  // v == 1 falls in the catch-all
}

// Brute-force onset: enumerate every possible 3-week run.
inline int onset_reference(const std::vector<double>& traj, double baseline) {
  for (std::size_t w = 0; w + 2 < traj.size(); ++w) {
    bool run = true;
    for (std::size_t k = w; k < w + 3; ++k) run = run && traj[k] > baseline;
    if (run) return static_cast<int>(w) + 1;
  }
  return -1;
}

}  // namespace oracle
