#include "dbflu/mmwr.hpp"

#include <stdexcept>

namespace dbflu {

namespace {

// Days from 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u + static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097L + static_cast<long>(doe) - 719468L;
}

// Day number of the Sunday starting MMWR week 1 of `year` (the Sunday of the
// week containing January 4th; weeks run Sunday..Saturday).
long mmwr_year_start(int year) {
  const long jan4 = days_from_civil(year, 1, 4);
  // 1970-01-01 was a Thursday; day-of-week with Sunday = 0.
  const long dow = ((jan4 + 4) % 7 + 7) % 7;
  return jan4 - dow;
}

}  // namespace

int mmwr_weeks_in_year(int year) {
  return static_cast<int>((mmwr_year_start(year + 1) - mmwr_year_start(year)) / 7);
}

std::optional<SeasonWeek> mmwr_to_season_week(int year, int mmwr_week) {
  if (mmwr_week < 1 || mmwr_week > mmwr_weeks_in_year(year)) {
    throw std::invalid_argument("mmwr_to_season_week: week does not exist in that MMWR year");
  }
  if (mmwr_week >= kSeasonStartMmwrWeek) {
    const int week = mmwr_week - kSeasonStartMmwrWeek + 1;
    if (week > kSeasonWeeks) return std::nullopt;
    return SeasonWeek{year, week};
  }
  const int season = year - 1;
  const int week = mmwr_week + mmwr_weeks_in_year(season) - kSeasonStartMmwrWeek + 1;
  if (week > kSeasonWeeks) return std::nullopt;
  return SeasonWeek{season, week};
}

std::pair<int, int> season_week_to_mmwr(int season, int week) {
  if (week < 1 || week > kSeasonWeeks) throw std::invalid_argument("season_week_to_mmwr: week outside 1..35");
  const int head = mmwr_weeks_in_year(season) - kSeasonStartMmwrWeek + 1;  // weeks left in the starting year
  if (week <= head) return {season, kSeasonStartMmwrWeek + week - 1};
  return {season + 1, week - head};
}

int to_epiweek(int year, int mmwr_week) { return year * 100 + mmwr_week; }

std::pair<int, int> from_epiweek(int epiweek) {
  const int year = epiweek / 100;
  const int week = epiweek % 100;
  if (year < 1800 || week < 1 || week > 53) throw std::invalid_argument("from_epiweek: malformed YYYYWW label");
  return {year, week};
}

}  // namespace dbflu
