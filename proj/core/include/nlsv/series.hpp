#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nlsv {

/// Daily joint series of log price and implied variance (squared VXO as a
/// decimal). Consecutive rows are one trading day apart regardless of the
/// calendar gap between their dates.
struct ObservedSeries {
  std::vector<std::string> dates;  // ISO yyyy-mm-dd
  std::vector<double> x;
  std::vector<double> iv;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }

  /// Rows [begin, end).
  ObservedSeries slice(std::size_t begin, std::size_t end) const;

  /// Throws std::invalid_argument describing the first offending row.
  void validate() const;
};

/// Half-open index ranges into a series.
struct SampleSplit {
  std::size_t in_begin = 0;
  std::size_t in_end = 0;
  std::size_t out_begin = 0;
  std::size_t out_end = 0;

  std::size_t in_size() const { return in_end - in_begin; }
  std::size_t out_size() const { return out_end - out_begin; }
};

inline constexpr const char* kDefaultSplitDate = "1999-12-31";

/// The out-of-sample part starts at the first date strictly after
/// split_date. Throws std::out_of_range if split_date precedes the series.
SampleSplit split(const ObservedSeries& series, const std::string& split_date);

bool is_iso_date(const std::string& s);

/// Weekday calendar starting at `first` (weekends skipped, no holidays).
std::vector<std::string> business_dates(const std::string& first, std::size_t count);

}  // namespace nlsv
