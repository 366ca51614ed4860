#include "nlsv/data_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nlsv {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Non-finite numbers are stored as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

json array_of(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}
std::vector<double> doubles_of(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(num(x));
  return out;
}

const char* kParamFields[] = {"sigma", "rho", "b0_q", "b1_q", "a0", "a1",
                              "b0",    "b1",  "b2",   "b3",   "r",  "c"};

json theta_json(const ParamVector& t) {
  json j = json::object();
  for (const char* k : kParamFields) j[k] = num(get_parameter(t, k));
  return j;
}
ParamVector theta_from(const json& j) {
  ParamVector t;
  for (const char* k : kParamFields) set_parameter(t, k, num(j.at(k)));
  return t;
}

json config_json(const LikelihoodConfig& c) {
  return {{"M", c.m},
          {"S", c.s},
          {"n_bridges", c.n_bridges},
          {"delta", c.delta},
          {"seed", c.seed},
          {"min_observations", c.min_observations},
          {"max_iterations", c.max_iterations},
          {"size_tolerance", c.size_tolerance},
          {"restarts", c.restarts},
          {"fd_step", c.fd_step},
          {"hessian_step", c.hessian_step},
          {"workers", c.workers}};
}
LikelihoodConfig config_from(const json& j) {
  LikelihoodConfig c;
  c.m = j.at("M").get<int>();
  c.s = j.at("S").get<int>();
  c.n_bridges = j.at("n_bridges").get<int>();
  c.delta = j.at("delta").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.min_observations = j.at("min_observations").get<std::size_t>();
  c.max_iterations = j.at("max_iterations").get<std::size_t>();
  c.size_tolerance = j.at("size_tolerance").get<double>();
  c.restarts = j.at("restarts").get<int>();
  c.fd_step = j.at("fd_step").get<double>();
  c.hessian_step = j.at("hessian_step").get<double>();
  c.workers = j.at("workers").get<unsigned>();
  return c;
}

json header(const char* kind) { return {{"kind", kind}, {"schema_version", kSchemaVersion}}; }

json parse_artifact(const std::string& text, const char* kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON artifact: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("schema_version")) {
    throw FormatError("artifact lacks kind/schema_version");
  }
  if (j["schema_version"] != kSchemaVersion) {
    throw FormatError("artifact schema version " + j["schema_version"].dump() +
                      " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (j["kind"] != kind) {
    throw FormatError("artifact kind " + j["kind"].dump() + " where \"" + kind + "\" expected");
  }
  return j;
}

template <class Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid artifact: ") + e.what());
  }
}

json report_json(const ForecastReport& r) {
  json series = json::array();
  for (const auto& s : r.series) {
    series.push_back({{"model", to_string(s.model)},
                      {"target", to_string(s.target)},
                      {"horizon", s.horizon},
                      {"origin", s.origin},
                      {"forecast", array_of(s.forecast)},
                      {"realized", array_of(s.realized)},
                      {"reference", array_of(s.reference)}});
  }
  json metrics = json::array();
  for (const auto& m : r.metrics) {
    metrics.push_back({{"model", to_string(m.model)},
                       {"target", to_string(m.target)},
                       {"horizon", m.horizon},
                       {"n", m.value.n},
                       {"mae", num(m.value.mae)},
                       {"rmse", num(m.value.rmse)},
                       {"nmse", num(m.value.nmse)},
                       {"dir", num(m.value.dir)}});
  }
  json cw = json::array();
  for (const auto& c : r.clark_west) {
    cw.push_back({{"target", to_string(c.target)},
                  {"horizon", c.horizon},
                  {"small", to_string(c.small)},
                  {"big", to_string(c.big)},
                  {"statistic", num(c.value.statistic)},
                  {"p_value", num(c.value.p_value)},
                  {"degenerate", c.value.degenerate}});
  }
  json models = json::array();
  for (Family m : r.models) models.push_back(to_string(m));
  return {{"sample", r.sample},
          {"horizons", {{"x_iv", r.horizons.x_iv}, {"rv", r.horizons.rv}}},
          {"models", models},
          {"series", series},
          {"metrics", metrics},
          {"clark_west", cw}};
}

ForecastReport report_from(const json& j) {
  ForecastReport r;
  r.sample = j.at("sample").get<std::string>();
  r.horizons.x_iv = j.at("horizons").at("x_iv").get<std::vector<int>>();
  r.horizons.rv = j.at("horizons").at("rv").get<std::vector<int>>();
  for (const auto& m : j.at("models")) r.models.push_back(family_from_string(m.get<std::string>()));
  for (const auto& s : j.at("series")) {
    ForecastSeries fs;
    fs.model = family_from_string(s.at("model").get<std::string>());
    fs.target = target_from_string(s.at("target").get<std::string>());
    fs.horizon = s.at("horizon").get<int>();
    fs.origin = s.at("origin").get<std::vector<std::size_t>>();
    fs.forecast = doubles_of(s.at("forecast"));
    fs.realized = doubles_of(s.at("realized"));
    fs.reference = doubles_of(s.at("reference"));
    if (fs.forecast.size() != fs.origin.size() || fs.realized.size() != fs.origin.size() ||
        fs.reference.size() != fs.origin.size()) {
      throw FormatError("forecast series arrays have different lengths");
    }
    r.series.push_back(std::move(fs));
  }
  for (const auto& m : j.at("metrics")) {
    MetricsRow row;
    row.model = family_from_string(m.at("model").get<std::string>());
    row.target = target_from_string(m.at("target").get<std::string>());
    row.horizon = m.at("horizon").get<int>();
    row.value.n = m.at("n").get<std::size_t>();
    row.value.mae = num(m.at("mae"));
    row.value.rmse = num(m.at("rmse"));
    row.value.nmse = num(m.at("nmse"));
    row.value.dir = num(m.at("dir"));
    r.metrics.push_back(row);
  }
  for (const auto& c : j.at("clark_west")) {
    ClarkWestRow row;
    row.target = target_from_string(c.at("target").get<std::string>());
    row.horizon = c.at("horizon").get<int>();
    row.small = family_from_string(c.at("small").get<std::string>());
    row.big = family_from_string(c.at("big").get<std::string>());
    row.value.statistic = num(c.at("statistic"));
    row.value.p_value = num(c.at("p_value"));
    row.value.degenerate = c.at("degenerate").get<bool>();
    r.clark_west.push_back(row);
  }
  return r;
}

}  // namespace

VxoUnit vxo_unit_from_string(std::string_view s) {
  if (s == "percent") return VxoUnit::percent;
  if (s == "decimal") return VxoUnit::decimal;
  throw std::invalid_argument("vxo_unit must be 'percent' or 'decimal', got '" +
                              std::string(s) + "'");
}

std::string_view to_string(VxoUnit unit) {
  return unit == VxoUnit::percent ? "percent" : "decimal";
}

ObservedSeries read_csv(std::istream& in, const CsvSchema& schema, const std::string& origin) {
  if (!schema.vxo_unit) {
    throw std::invalid_argument("vxo_unit must be configured (percent or decimal)");
  }
  const double scale = *schema.vxo_unit == VxoUnit::percent ? 0.01 : 1.0;
  auto fail = [&](std::size_t line, const std::string& msg) {
    throw FormatError(origin + ":" + std::to_string(line) + ": " + msg);
  };

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) fail(1, "empty file, expected header date,price,vxo");
  ++lineno;
  if (split_commas(trim(line)) != std::vector<std::string>{"date", "price", "vxo"}) {
    fail(lineno, "header must be date,price,vxo");
  }
  ObservedSeries out;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto f = split_commas(t);
    if (f.size() != 3) fail(lineno, "expected 3 fields, found " + std::to_string(f.size()));
    if (!is_iso_date(f[0])) fail(lineno, "unparseable date '" + f[0] + "'");
    if (!out.dates.empty() && !(out.dates.back() < f[0])) {
      fail(lineno, f[0] == out.dates.back() ? "duplicate date " + f[0]
                                           : "date " + f[0] + " out of order");
    }
    const auto price = parse_double(f[1]);
    if (!price || !std::isfinite(*price)) fail(lineno, "unparseable price '" + f[1] + "'");
    if (!schema.price_is_log && !(*price > 0.0)) fail(lineno, "price must be positive");
    const auto vxo = parse_double(f[2]);
    if (!vxo || !std::isfinite(*vxo)) fail(lineno, "unparseable vxo '" + f[2] + "'");
    if (!(*vxo > 0.0)) fail(lineno, "vxo must be positive");
    const double vol = *vxo * scale;
    out.dates.push_back(f[0]);
    out.x.push_back(schema.price_is_log ? *price : std::log(*price));
    out.iv.push_back(vol * vol);
  }
  out.validate();
  return out;
}

ObservedSeries load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  return read_csv(in, schema, path);
}

void write_csv(std::ostream& out, const ObservedSeries& series, const CsvSchema& schema) {
  if (!schema.vxo_unit) throw std::invalid_argument("vxo_unit must be configured");
  const double scale = *schema.vxo_unit == VxoUnit::percent ? 100.0 : 1.0;
  out << "date,price,vxo\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double price = schema.price_is_log ? series.x[i] : std::exp(series.x[i]);
    out << series.dates[i] << ',' << format_double(price) << ','
        << format_double(std::sqrt(series.iv[i]) * scale) << '\n';
  }
}

void save_csv(const std::string& path, const ObservedSeries& series, const CsvSchema& schema) {
  std::ostringstream ss;
  write_csv(ss, series, schema);
  write_file(path, ss.str());
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw FormatError(where + "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw FormatError(where + "empty key");
    if (c.values_.count(key)) throw FormatError(where + "duplicate key '" + key + "'");
    c.values_[key] = trim(t.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path + ": cannot open");
  return parse(in, path);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string Config::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw FormatError(origin_ + ": missing required key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const auto v = parse_double(values_.at(key));
  if (!v) throw FormatError(origin_ + ": key '" + key + "' is not a number");
  return *v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(origin_ + ": key '" + key + "' is not an integer");
  }
  return v;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(origin_ + ": key '" + key + "' is not a non-negative integer");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& s = values_.at(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw FormatError(origin_ + ": key '" + key + "' is not a boolean");
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (const auto& f : split_commas(values_.at(key))) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (f.empty() || ec != std::errc() || ptr != f.data() + f.size()) {
      throw FormatError(origin_ + ": key '" + key + "' must be a comma-separated integer list");
    }
    out.push_back(v);
  }
  return out;
}

void Config::check_known(std::span<const std::string_view> known) const {
  for (const auto& [k, v] : values_) {
    bool ok = false;
    for (auto name : known) ok = ok || name == k;
    if (!ok) throw FormatError(origin_ + ": unknown key '" + k + "'");
  }
}

std::string Config::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string fit_to_json(const FitResult& f) {
  json j = header("fit");
  json cov = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(num(f.covariance(r, c)));
    cov.push_back(row);
  }
  json se = json::array();
  for (Eigen::Index i = 0; i < f.std_errors.size(); ++i) se.push_back(num(f.std_errors(i)));
  j["model"] = to_string(f.spec.family);
  j["theta"] = theta_json(f.theta);
  j["loglik"] = num(f.loglik);
  j["n_observations"] = f.n_observations;
  j["names"] = f.names;
  j["covariance"] = cov;
  j["std_errors"] = se;
  j["covariance_ok"] = f.covariance_ok;
  j["covariance_message"] = f.covariance_message;
  j["diagnostics"] = {{"converged", f.diagnostics.converged},
                      {"iterations", f.diagnostics.iterations},
                      {"evaluations", f.diagnostics.evaluations},
                      {"starts", f.diagnostics.starts},
                      {"message", f.diagnostics.message}};
  j["config"] = config_json(f.config);
  return j.dump(2) + "\n";
}

FitResult fit_from_json(const std::string& text) {
  const json j = parse_artifact(text, "fit");
  return guarded([&] {
    FitResult f;
    f.spec = ModelSpec{family_from_string(j.at("model").get<std::string>())};
    f.theta = theta_from(j.at("theta"));
    f.loglik = num(j.at("loglik"));
    f.n_observations = j.at("n_observations").get<std::size_t>();
    f.names = j.at("names").get<std::vector<std::string>>();
    const auto& cov = j.at("covariance");
    const auto n = static_cast<Eigen::Index>(cov.size());
    f.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto row = doubles_of(cov[static_cast<std::size_t>(r)]);
      if (static_cast<Eigen::Index>(row.size()) != n) throw FormatError("covariance is not square");
      for (Eigen::Index c = 0; c < n; ++c) f.covariance(r, c) = row[static_cast<std::size_t>(c)];
    }
    const auto se = doubles_of(j.at("std_errors"));
    f.std_errors = Eigen::Map<const Eigen::VectorXd>(se.data(), static_cast<Eigen::Index>(se.size()));
    f.covariance_ok = j.at("covariance_ok").get<bool>();
    f.covariance_message = j.at("covariance_message").get<std::string>();
    const auto& d = j.at("diagnostics");
    f.diagnostics.converged = d.at("converged").get<bool>();
    f.diagnostics.iterations = d.at("iterations").get<std::size_t>();
    f.diagnostics.evaluations = d.at("evaluations").get<std::size_t>();
    f.diagnostics.starts = d.at("starts").get<int>();
    f.diagnostics.message = d.at("message").get<std::string>();
    f.config = config_from(j.at("config"));
    return f;
  });
}

std::string report_to_json(const ForecastReport& report) {
  json j = header("forecast_report");
  j["report"] = report_json(report);
  return j.dump(2) + "\n";
}

ForecastReport report_from_json(const std::string& text) {
  const json j = parse_artifact(text, "forecast_report");
  return guarded([&] { return report_from(j.at("report")); });
}

std::string rolling_to_json(const RollingResult& r) {
  json j = header("rolling");
  j["report"] = report_json(r.report);
  json paths = json::array();
  for (const auto& p : r.parameter_paths) {
    paths.push_back({{"date", p.date},
                     {"model", to_string(p.model)},
                     {"theta", theta_json(p.theta)},
                     {"loglik", num(p.loglik)},
                     {"converged", p.converged}});
  }
  json failures = json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"date", f.date}, {"model", to_string(f.model)}, {"message", f.message}});
  }
  j["parameter_paths"] = paths;
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

RollingResult rolling_from_json(const std::string& text) {
  const json j = parse_artifact(text, "rolling");
  return guarded([&] {
    RollingResult r;
    r.report = report_from(j.at("report"));
    for (const auto& p : j.at("parameter_paths")) {
      r.parameter_paths.push_back({p.at("date").get<std::string>(),
                                   family_from_string(p.at("model").get<std::string>()),
                                   theta_from(p.at("theta")), num(p.at("loglik")),
                                   p.at("converged").get<bool>()});
    }
    for (const auto& f : j.at("failures")) {
      r.failures.push_back({f.at("date").get<std::string>(),
                            family_from_string(f.at("model").get<std::string>()),
                            f.at("message").get<std::string>()});
    }
    return r;
  });
}

void save_results(const FitResult& fit, const std::string& path) {
  write_file(path, fit_to_json(fit));
}
void save_results(const ForecastReport& report, const std::string& path) {
  write_file(path, report_to_json(report));
}
void save_results(const RollingResult& result, const std::string& path) {
  write_file(path, rolling_to_json(result));
}
FitResult load_fit(const std::string& path) { return fit_from_json(read_file(path)); }
ForecastReport load_report(const std::string& path) { return report_from_json(read_file(path)); }
RollingResult load_rolling(const std::string& path) { return rolling_from_json(read_file(path)); }

std::string artifact_kind(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": malformed JSON artifact: " + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw FormatError(path + ": artifact lacks a kind");
  }
  return j["kind"].get<std::string>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path + ": cannot write");
  out << contents;
  if (!out) throw FormatError(path + ": write failed");
}

}  // namespace nlsv
