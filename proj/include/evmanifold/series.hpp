#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "evmanifold/calendar.hpp"
#include "evmanifold/errors.hpp"

namespace evmanifold {

// A univariate calendar-indexed series. Times are serial day numbers and must
// be strictly increasing; values are finite reals in data units.
struct UniSeries {
  std::vector<long> times;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }

  void validate() const {
    if (times.size() != values.size()) {
      throw data_error("series times/values length mismatch");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (times[i] <= times[i - 1]) {
        throw data_error("series times not strictly increasing at index " + std::to_string(i));
      }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw data_error("non-finite value at index " + std::to_string(i));
      }
    }
  }

  // Span in days between first and last observation.
  long span_days() const { return times.empty() ? 0 : times.back() - times.front(); }

  // Median gap between consecutive observations, in days. Used to sniff the
  // calendar resolution (daily vs monthly vs yearly).
  double median_spacing_days() const {
    if (times.size() < 2) return 0.0;
    std::vector<long> gaps(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) gaps[i - 1] = times[i] - times[i - 1];
    std::sort(gaps.begin(), gaps.end());
    const std::size_t n = gaps.size();
    return n % 2 ? static_cast<double>(gaps[n / 2])
                 : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
  }
};

}  // namespace evmanifold
