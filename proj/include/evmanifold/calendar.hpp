#pragma once

#include <cstdio>
#include <string>

#include "evmanifold/errors.hpp"

namespace evmanifold {

// Proleptic-Gregorian civil date. Serial numbers count days since the epoch
// 1970-01-01, which keeps window arithmetic (day spans, month bins) exact
// without any time-zone or DST concerns.

struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

// Howard Hinnant's days-from-civil algorithm (public domain).
inline long civil_to_serial(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline Date serial_to_civil(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

inline long to_serial(const Date& dt) { return civil_to_serial(dt.year, dt.month, dt.day); }

inline int month_of(long serial) { return serial_to_civil(serial).month; }

inline int year_of(long serial) { return serial_to_civil(serial).year; }

// Accepts "YYYY-MM" or "YYYY-MM-DD". A month-resolution date is pinned to the
// 15th so that windows centred on it sit mid-month.
inline long parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) == 3) {
    // full date
  } else if (std::sscanf(s.c_str(), "%d-%d%c", &y, &m, &extra) == 2) {
    d = 15;
  } else {
    throw data_error("unparseable date '" + s + "' (expected YYYY-MM or YYYY-MM-DD)");
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw data_error("date out of range '" + s + "'");
  }
  return civil_to_serial(y, m, d);
}

inline std::string format_date(long serial) {
  const Date dt = serial_to_civil(serial);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", dt.year, dt.month, dt.day);
  return buf;
}

constexpr double kDaysPerYear = 365.25;

}  // namespace evmanifold
