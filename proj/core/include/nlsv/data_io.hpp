#pragma once

// CSV input, flat key = value configuration files and JSON artifacts.

#include "nlsv/forecasting.hpp"
#include "nlsv/likelihood.hpp"
#include "nlsv/series.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlsv {

/// Input or artifact problem with a location ("file:line: message").
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VxoUnit { percent, decimal };
VxoUnit vxo_unit_from_string(std::string_view s);
std::string_view to_string(VxoUnit unit);

struct CsvSchema {
  /// Must be set explicitly; there is no autodetection.
  std::optional<VxoUnit> vxo_unit;
  bool price_is_log = false;
};

/// Header `date,price,vxo`. iv = vxo^2 with vxo as a decimal.
ObservedSeries read_csv(std::istream& in, const CsvSchema& schema,
                        const std::string& origin = "<input>");
ObservedSeries load_csv(const std::string& path, const CsvSchema& schema);

/// Writes the input schema back; prices as exp(x) unless price_is_log.
void write_csv(std::ostream& out, const ObservedSeries& series, const CsvSchema& schema);
void save_csv(const std::string& path, const ObservedSeries& series, const CsvSchema& schema);

/// Flat `key = value` file; '#' starts a comment. Keys are kept sorted.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void erase(const std::string& key) { values_.erase(key); }
  const std::map<std::string, std::string>& entries() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated integers.
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  /// Throws FormatError naming the first key not in `known`.
  void check_known(std::span<const std::string_view> known) const;

  /// One `key = value` line per entry, sorted by key.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<config>";
};

inline constexpr int kSchemaVersion = 1;

std::string fit_to_json(const FitResult& fit);
FitResult fit_from_json(const std::string& text);
std::string report_to_json(const ForecastReport& report);
ForecastReport report_from_json(const std::string& text);
std::string rolling_to_json(const RollingResult& result);
RollingResult rolling_from_json(const std::string& text);

void save_results(const FitResult& fit, const std::string& path);
void save_results(const ForecastReport& report, const std::string& path);
void save_results(const RollingResult& result, const std::string& path);
FitResult load_fit(const std::string& path);
ForecastReport load_report(const std::string& path);
RollingResult load_rolling(const std::string& path);

/// Kind recorded in a saved artifact ("fit", "forecast_report", "rolling").
std::string artifact_kind(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace nlsv
