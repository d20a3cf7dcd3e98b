#ifndef SIGCD_DATES_HPP
#define SIGCD_DATES_HPP

#include <cstdint>
#include <string>

namespace sigcd {

// Calendar dates only; the pipeline works on daily closes.
struct CivilDate {
  int year = 1970;
  int month = 1;
  int day = 1;
};

// Days since 1970-01-01 (proleptic Gregorian).
std::int64_t days_from_civil(const CivilDate& d);
CivilDate civil_from_days(std::int64_t z);

// Strict "YYYY-MM-DD"; returns false on malformed input or invalid dates.
bool parse_iso_date(const std::string& text, CivilDate& out);
std::string format_iso_date(const CivilDate& d);

} // namespace sigcd

#endif
