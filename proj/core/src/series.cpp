#include "nlsv/series.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace nlsv {

ObservedSeries ObservedSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw std::out_of_range("series slice out of range");
  ObservedSeries out;
  out.dates.assign(dates.begin() + begin, dates.begin() + end);
  out.x.assign(x.begin() + begin, x.begin() + end);
  out.iv.assign(iv.begin() + begin, iv.begin() + end);
  return out;
}

void ObservedSeries::validate() const {
  if (dates.size() != x.size() || iv.size() != x.size()) {
    throw std::invalid_argument("series columns have different lengths");
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const std::string row = "row " + std::to_string(i);
    if (!is_iso_date(dates[i])) throw std::invalid_argument(row + ": bad date '" + dates[i] + "'");
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      throw std::invalid_argument(row + ": date " + dates[i] + " not after " + dates[i - 1]);
    }
    if (!std::isfinite(x[i])) throw std::invalid_argument(row + ": non-finite log price");
    if (!(iv[i] > 0.0) || !std::isfinite(iv[i])) {
      throw std::invalid_argument(row + ": implied variance must be positive");
    }
  }
}

SampleSplit split(const ObservedSeries& series, const std::string& split_date) {
  if (series.empty() || split_date < series.dates.front()) {
    throw std::out_of_range("split date " + split_date + " precedes the series");
  }
  const auto it = std::upper_bound(series.dates.begin(), series.dates.end(), split_date);
  const auto cut = static_cast<std::size_t>(it - series.dates.begin());
  return {0, cut, cut, series.size()};
}

bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{std::stoi(s.substr(0, 4))},
                           month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
                           day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
  return ymd.ok();
}

std::vector<std::string> business_dates(const std::string& first, std::size_t count) {
  if (!is_iso_date(first)) throw std::invalid_argument("bad start date '" + first + "'");
  using namespace std::chrono;
  sys_days day_point{year_month_day{year{std::stoi(first.substr(0, 4))},
                                    month{static_cast<unsigned>(std::stoi(first.substr(5, 2)))},
                                    day{static_cast<unsigned>(std::stoi(first.substr(8, 2)))}}};
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    const weekday wd{day_point};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day_point};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    day_point += days{1};
  }
  return out;
}

}  // namespace nlsv
