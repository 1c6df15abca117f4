#pragma once

#include <optional>
#include <utility>

namespace dbflu {

// MMWR epidemiological calendar. MMWR week 1 of a year is the Sunday-started
// week containing January 4th; years run 52 or 53 weeks.
//
// Season weeks: season-week 1 is MMWR week 40 of the season's starting year,
// so weeks 40..52(53) map to season-weeks 1..13(14) and the next year's weeks
// continue from there, truncated at season-week 35. In a 53-week starting
// year the extra week shifts everything after it by one, which is why MMWR
// week 1 lands on season-week 14 or 15 depending on the year.

inline constexpr int kSeasonWeeks = 35;
inline constexpr int kSeasonStartMmwrWeek = 40;

struct SeasonWeek {
  int season;
  int week;  // 1..kSeasonWeeks
};

// Number of MMWR weeks (52 or 53) in the given MMWR year.
int mmwr_weeks_in_year(int year);

// Maps a calendar (year, MMWR week) into the 35-week season window.
// Returns nullopt for valid weeks that fall outside any season window;
// throws for weeks that do not exist in that year's MMWR calendar.
std::optional<SeasonWeek> mmwr_to_season_week(int year, int mmwr_week);

// Inverse of mmwr_to_season_week; week must be in 1..kSeasonWeeks.
std::pair<int, int> season_week_to_mmwr(int season, int week);

// Epiweek label YYYYWW <-> (year, week) helpers used for vintage tags.
int to_epiweek(int year, int mmwr_week);
std::pair<int, int> from_epiweek(int epiweek);

}  // namespace dbflu
