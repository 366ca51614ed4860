#include "app.hpp"

#include "nlsv/forecasting.hpp"
#include "nlsv/likelihood.hpp"
#include "nlsv/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

namespace nlsv::app {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

using Defaults = std::vector<std::pair<std::string, std::string>>;

const Defaults& common_defaults() {
  static const Defaults d{
      {"seed", "20240101"}, {"model", "both"},     {"rate", fmt(kDefaultRate)},
      {"c", fmt(kDefaultDampening)}, {"workers", "1"}, {"price_is_log", "false"},
  };
  return d;
}

const Defaults& estimation_defaults() {
  static const Defaults d{
      {"M", "24"},           {"S", "576"},          {"n_bridges", "576"},
      {"restarts", "3"},     {"max_iterations", "400"}, {"tolerance", "0.0001"},
      {"min_observations", "200"}, {"split_date", kDefaultSplitDate},
  };
  return d;
}

const Defaults& forecast_defaults() {
  static const Defaults d{
      {"paths", std::to_string(kForecastPaths)},
      {"dt_hours", "1"},
      {"horizons", "1,5,22,66,131"},
      {"rv_horizons", "5,22,66,131"},
  };
  return d;
}

// Keys that must be given explicitly for a command to run.
std::vector<std::string> required_keys(const std::string& command) {
  if (command == "simulate") return {};
  return {"input", "vxo_unit"};
}

Defaults defaults_for(const std::string& command) {
  Defaults d = common_defaults();
  auto add = [&d](const Defaults& more) { d.insert(d.end(), more.begin(), more.end()); };
  if (command == "simulate") {
    add({{"n", "2500"},
         {"start_date", "1990-01-02"},
         {"x0", fmt(std::log(100.0))},
         {"v0", "0.02"},
         {"dt_hours", "1"},
         {"vxo_unit", "percent"},
         {"model", "NL"}});
    for (const auto& name : parameter_names(ModelSpec::nl())) {
      d.emplace_back("theta." + name, "");  // empty = reference value of the family
    }
  } else if (command == "estimate") {
    add(estimation_defaults());
  } else if (command == "forecast") {
    add(estimation_defaults());
    add(forecast_defaults());
    d.emplace_back("fits", "");
  } else if (command == "rolling") {
    add(estimation_defaults());
    add(forecast_defaults());
    add({{"window", "0"}, {"fixed_window", "false"}, {"refit_every", "1"},
         {"warm_restarts", "1"}});
  } else if (command == "report") {
    add({{"run_dir", ""}, {"grid_min", "0.001"}, {"grid_max", "0.2"}, {"grid_points", "200"},
         {"split_date", kDefaultSplitDate}});
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
  for (const auto& k : required_keys(command)) d.emplace_back(k, "");
  return d;
}

std::vector<Family> models_of(const Config& c) {
  const std::string m = c.require("model");
  if (m == "both") return {Family::LN, Family::NL};
  const Family f = family_from_string(m);
  if (f == Family::RW) throw std::invalid_argument("model must be LN, NL or both");
  return {f};
}

CsvSchema schema_of(const Config& c) {
  CsvSchema s;
  s.vxo_unit = vxo_unit_from_string(c.require("vxo_unit"));
  s.price_is_log = c.get_bool("price_is_log", false);
  return s;
}

LikelihoodConfig likelihood_of(const Config& c) {
  LikelihoodConfig l;
  l.m = static_cast<int>(c.get_int("M", 24));
  l.s = static_cast<int>(c.get_int("S", 576));
  l.n_bridges = static_cast<int>(c.get_int("n_bridges", 576));
  l.seed = c.get_uint("seed", 0);
  l.min_observations = static_cast<std::size_t>(c.get_int("min_observations", 200));
  l.max_iterations = static_cast<std::size_t>(c.get_int("max_iterations", 400));
  l.size_tolerance = c.get_double("tolerance", 1e-4);
  l.restarts = static_cast<int>(c.get_int("restarts", 3));
  l.workers = static_cast<unsigned>(c.get_int("workers", 1));
  l.validate();
  return l;
}

ForecastOptions forecast_options_of(const Config& c) {
  ForecastOptions o;
  o.n_paths = static_cast<std::size_t>(c.get_int("paths", kForecastPaths));
  const double hours = c.get_double("dt_hours", 1.0);
  if (!(hours > 0.0) || hours > 8.0) throw std::invalid_argument("dt_hours must be in (0, 8]");
  o.dt = kHourlyStep * hours;
  o.workers = static_cast<unsigned>(c.get_int("workers", 1));
  if (o.n_paths == 0) throw std::invalid_argument("paths must be >= 1");
  return o;
}

HorizonGrid horizons_of(const Config& c) {
  HorizonGrid g;
  g.x_iv = c.get_int_list("horizons", g.x_iv);
  g.rv = c.get_int_list("rv_horizons", g.rv);
  for (int h : g.x_iv) {
    if (h < 1) throw std::invalid_argument("horizons must be >= 1");
  }
  for (int h : g.rv) {
    if (h < 1) throw std::invalid_argument("rv_horizons must be >= 1");
  }
  return g;
}

ParamVector base_params(const Config& c, Family f) {
  ParamVector t = f == Family::NL ? reference_nl_parameters() : reference_ln_parameters();
  t.r = c.get_double("rate", kDefaultRate);
  t.c = c.get_double("c", kDefaultDampening);
  return t;
}

ObservedSeries input_series(const Config& c) {
  return load_csv(c.require("input"), schema_of(c));
}

void write_manifest(const std::string& command, const Config& resolved, const fs::path& dir) {
  Config m = resolved;
  m.set("command", command);
  write_file((dir / kManifestName).string(), m.to_string());
}

std::string fit_file(Family f) { return "fit_" + std::string(to_string(f)) + ".json"; }

std::string metrics_csv(const ForecastReport& r) {
  std::string out = "sample,target,horizon,model,n,mae,rmse,nmse,dir\n";
  for (const auto& m : r.metrics) {
    out += r.sample + "," + std::string(to_string(m.target)) + "," + std::to_string(m.horizon) +
           "," + std::string(to_string(m.model)) + "," + std::to_string(m.value.n) + "," +
           fmt(m.value.mae) + "," + fmt(m.value.rmse) + "," + fmt(m.value.nmse) + "," +
           fmt(m.value.dir) + "\n";
  }
  return out;
}

std::string clark_west_csv(const ForecastReport& r) {
  std::string out = "sample,target,horizon,small,big,statistic,p_value,degenerate\n";
  for (const auto& c : r.clark_west) {
    out += r.sample + "," + std::string(to_string(c.target)) + "," + std::to_string(c.horizon) +
           "," + std::string(to_string(c.small)) + "," + std::string(to_string(c.big)) + "," +
           fmt(c.value.statistic) + "," + fmt(c.value.p_value) + "," +
           (c.value.degenerate ? "true" : "false") + "\n";
  }
  return out;
}

void write_report_files(const ForecastReport& r, const fs::path& dir) {
  save_results(r, (dir / ("report_" + r.sample + ".json")).string());
  write_file((dir / ("metrics_" + r.sample + ".csv")).string(), metrics_csv(r));
  write_file((dir / ("clark_west_" + r.sample + ".csv")).string(), clark_west_csv(r));
  write_file((dir / ("metrics_" + r.sample + ".txt")).string(), metric_table(r));
}

std::string parameter_paths_csv(const RollingResult& r) {
  std::string out = "date,model,param,value\n";
  for (const auto& p : r.parameter_paths) {
    for (const auto& name : parameter_names(ModelSpec{p.model})) {
      out += p.date + "," + std::string(to_string(p.model)) + "," + name + "," +
             fmt(get_parameter(p.theta, name)) + "\n";
    }
  }
  return out;
}

void cmd_simulate(const Config& c, const fs::path& dir, std::ostream& log) {
  const auto models = models_of(c);
  if (models.size() != 1) throw std::invalid_argument("simulate needs model = LN or NL");
  const Family f = models.front();
  ParamVector theta = base_params(c, f);
  for (const auto& name : parameter_names(ModelSpec{f})) {
    set_parameter(theta, name, c.get_double("theta." + name, get_parameter(theta, name)));
  }
  if (f == Family::LN) theta.b0 = theta.b0_q;
  theta.validate();
  const auto n = c.get_int("n", 2500);
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  const double hours = c.get_double("dt_hours", 1.0);
  const auto per_day = static_cast<int>(std::llround(8.0 / hours));
  if (per_day < 1 || std::abs(per_day * hours - 8.0) > 1e-9) {
    throw std::invalid_argument("dt_hours must divide the 8-hour trading day");
  }
  const State initial{c.get_double("x0", std::log(100.0)), c.get_double("v0", 0.02)};
  const ObservedSeries s =
      simulate_series(initial, theta, ModelSpec{f}, static_cast<std::size_t>(n),
                      c.require("start_date"), per_day, RngStream(c.get_uint("seed", 0), 0));
  save_csv((dir / "series.csv").string(), s, schema_of(c));
  log << "simulated " << s.size() << " days of the " << to_string(f) << " model\n";
}

std::vector<FitResult> fit_models(const Config& c, const ObservedSeries& in_sample,
                                  std::ostream& log) {
  std::vector<FitResult> fits;
  const LikelihoodConfig lc = likelihood_of(c);
  for (Family f : models_of(c)) {
    ParamVector init = moment_initial_guess(in_sample, c.get_double("rate", kDefaultRate));
    init.c = c.get_double("c", kDefaultDampening);
    log << "fitting " << to_string(f) << " on " << in_sample.size() << " observations\n";
    FitResult r = fit(in_sample, ModelSpec{f}, lc, init);
    if (!std::isfinite(r.loglik)) {
      throw EstimationError(std::string(to_string(f)) + " fit failed: " + r.diagnostics.message);
    }
    log << "  loglik " << fmt(r.loglik) << ", " << r.diagnostics.message << "\n";
    fits.push_back(std::move(r));
  }
  return fits;
}

ObservedSeries in_sample_of(const Config& c, const ObservedSeries& s) {
  const SampleSplit cut = split(s, c.require("split_date"));
  return s.slice(cut.in_begin, cut.in_end);
}

void cmd_estimate(const Config& c, const fs::path& dir, std::ostream& log) {
  const ObservedSeries s = input_series(c);
  const auto fits = fit_models(c, in_sample_of(c, s), log);
  for (const auto& f : fits) save_results(f, (dir / fit_file(f.spec.family)).string());
  write_file((dir / "parameters.txt").string(), parameter_table(fits));
}

void cmd_forecast(const Config& c, const fs::path& dir, std::ostream& log) {
  const ObservedSeries s = input_series(c);
  const SampleSplit cut = split(s, c.require("split_date"));
  std::vector<FitResult> fits;
  const std::string from = c.get("fits", "");
  if (from.empty()) {
    fits = fit_models(c, s.slice(cut.in_begin, cut.in_end), log);
  } else {
    for (Family f : models_of(c)) fits.push_back(load_fit((fs::path(from) / fit_file(f)).string()));
  }
  std::vector<ModelParameters> params;
  for (const auto& f : fits) {
    save_results(f, (dir / fit_file(f.spec.family)).string());
    params.push_back({f.spec.family, f.theta});
  }
  write_file((dir / "parameters.txt").string(), parameter_table(fits));

  const auto opts = forecast_options_of(c);
  const auto grid = horizons_of(c);
  const std::uint64_t seed = c.get_uint("seed", 0);
  const ObservedSeries in = s.slice(cut.in_begin, cut.in_end);
  log << "forecasting from " << in.size() << " in-sample origins\n";
  write_report_files(evaluate_forecasts(in, 0, in.size(), params, grid, opts, seed, "in"), dir);
  log << "forecasting from " << cut.out_size() << " out-of-sample origins\n";
  write_report_files(
      evaluate_forecasts(s, cut.out_begin, cut.out_end, params, grid, opts, seed, "out"), dir);
}

void cmd_rolling(const Config& c, const fs::path& dir, std::ostream& log) {
  const ObservedSeries s = input_series(c);
  RollingConfig rc;
  rc.fit = likelihood_of(c);
  rc.forecast = forecast_options_of(c);
  rc.horizons = horizons_of(c);
  rc.models = {Family::RW};
  for (Family f : models_of(c)) rc.models.push_back(f);
  rc.fixed_window = c.get_bool("fixed_window", false);
  rc.window = static_cast<std::size_t>(c.get_int("window", 0));
  rc.refit_every = static_cast<std::size_t>(c.get_int("refit_every", 1));
  rc.warm_restarts = static_cast<int>(c.get_int("warm_restarts", 1));
  rc.seed = c.get_uint("seed", 0);
  log << "rolling evaluation after " << c.require("split_date") << "\n";
  const RollingResult r = rolling_evaluation(s, c.require("split_date"), rc);
  save_results(r, (dir / "rolling.json").string());
  write_file((dir / "metrics_out.csv").string(), metrics_csv(r.report));
  write_file((dir / "clark_west_out.csv").string(), clark_west_csv(r.report));
  write_file((dir / "metrics_out.txt").string(), metric_table(r.report));
  write_file((dir / "parameter_paths.csv").string(), parameter_paths_csv(r));
  std::string failures = "date,model,message\n";
  for (const auto& f : r.failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    failures += f.date + "," + std::string(to_string(f.model)) + "," + msg + "\n";
  }
  write_file((dir / "failures.csv").string(), failures);
  log << r.parameter_paths.size() << " re-fits, " << r.failures.size() << " failures\n";
}

// Renders plot data from saved artifacts; nothing is re-estimated.
void cmd_report(const Config& c, const fs::path& dir, std::ostream& log) {
  const fs::path src = c.get("run_dir", "").empty() ? dir : fs::path(c.get("run_dir", ""));
  const ObservedSeries s = input_series(c);
  std::vector<FitResult> fits;
  for (Family f : {Family::LN, Family::NL}) {
    const fs::path p = src / fit_file(f);
    if (fs::exists(p)) fits.push_back(load_fit(p.string()));
  }
  std::size_t produced = 0;
  if (!fits.empty()) {
    std::string ivv = "date,model,iv,v\n";
    std::string premia = "date,model,lambda_v\n";
    for (const auto& f : fits) {
      const SwapCoefficients k = swap_coefficients(f.theta, kSwapHorizon);
      const auto lambda = risk_premium_series(s, f.theta, f.spec);
      const std::string m(to_string(f.spec.family));
      for (std::size_t i = 0; i < s.size(); ++i) {
        ivv += s.dates[i] + "," + m + "," + fmt(s.iv[i]) + "," + fmt(iv_to_v(s.iv[i], k)) + "\n";
        premia += s.dates[i] + "," + m + "," + fmt(lambda[i]) + "\n";
      }
    }
    const double lo = c.get_double("grid_min", 0.001);
    const double hi = c.get_double("grid_max", 0.2);
    const auto points = c.get_int("grid_points", 200);
    if (!(lo > 0.0) || !(hi > lo) || points < 2) throw std::invalid_argument("bad drift grid");
    std::string drift = "v,model,drift_q,drift_p\n";
    for (const auto& f : fits) {
      for (long long i = 0; i < points; ++i) {
        const double v = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const State st{0.0, v};
        drift += fmt(v) + "," + std::string(to_string(f.spec.family)) + "," +
                 fmt(drift_q(st, f.theta)(1)) + "," + fmt(drift_p(st, f.theta, f.spec)(1)) + "\n";
      }
    }
    write_file((dir / "iv_vs_v.csv").string(), ivv);
    write_file((dir / "premia.csv").string(), premia);
    write_file((dir / "drift_grid.csv").string(), drift);
    write_file((dir / "parameters.txt").string(), parameter_table(fits));
    produced += 4;
  }
  if (fs::exists(src / "rolling.json")) {
    const RollingResult r = load_rolling((src / "rolling.json").string());
    write_file((dir / "parameter_paths.csv").string(), parameter_paths_csv(r));
    write_file((dir / "metrics_out.txt").string(), metric_table(r.report));
    produced += 2;
  }
  for (const char* sample : {"in", "out"}) {
    const fs::path p = src / (std::string("report_") + sample + ".json");
    if (!fs::exists(p)) continue;
    const ForecastReport r = load_report(p.string());
    write_file((dir / ("metrics_" + r.sample + ".txt")).string(), metric_table(r));
    write_file((dir / ("metrics_" + r.sample + ".csv")).string(), metrics_csv(r));
    produced += 2;
  }
  if (produced == 0) {
    throw std::runtime_error("no fit, forecast or rolling artifacts found in " + src.string());
  }
  log << "wrote " << produced << " report files\n";
}

}  // namespace

Config resolve(const std::string& command, const Config& config,
               std::optional<std::uint64_t> seed_flag, bool use_env) {
  const Defaults d = defaults_for(command);
  std::vector<std::string_view> known;
  for (const auto& [k, v] : d) known.push_back(k);
  known.push_back("command");
  config.check_known(known);

  Config out;
  for (const auto& [k, v] : d) out.set(k, config.get(k, v));
  if (seed_flag) {
    out.set("seed", std::to_string(*seed_flag));
  } else if (const char* env = use_env ? std::getenv(kSeedEnv) : nullptr; env && *env) {
    Config tmp;
    tmp.set("seed", env);
    out.set("seed", std::to_string(tmp.get_uint("seed", 0)));
  }
  for (const auto& k : required_keys(command)) {
    if (out.get(k, "").empty()) throw FormatError("missing required key '" + k + "'");
  }
  if (out.has("input") && !out.get("input", "").empty()) {
    out.set("input", fs::absolute(out.get("input", "")).lexically_normal().string());
  }
  for (const char* k : {"fits", "run_dir"}) {
    if (out.has(k) && !out.get(k, "").empty()) {
      out.set(k, fs::absolute(out.get(k, "")).lexically_normal().string());
    }
  }
  if (command == "simulate") {
    // Record the parameters actually simulated.
    const auto models = models_of(out);
    if (models.size() != 1) throw std::invalid_argument("simulate needs model = LN or NL");
    const ParamVector ref = base_params(out, models.front());
    const auto& names = parameter_names(ModelSpec{models.front()});
    for (const auto& name : parameter_names(ModelSpec::nl())) {
      const std::string key = "theta." + name;
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        if (!out.get(key, "").empty()) {
          throw FormatError("'" + key + "' is not a parameter of the selected model");
        }
        out.erase(key);
      } else if (out.get(key, "").empty()) {
        out.set(key, fmt(get_parameter(ref, name)));
      } else {
        out.get_double(key, 0.0);
      }
    }
  }
  // Type checks up front so bad values fail before any work starts.
  out.get_uint("seed", 0);
  models_of(out);
  if (out.has("vxo_unit")) schema_of(out);
  if (out.has("M")) likelihood_of(out);
  if (out.has("paths")) {
    forecast_options_of(out);
    horizons_of(out);
  }
  return out;
}

void run(const std::string& command, const Config& resolved, const fs::path& out_dir,
         std::ostream& log) {
  fs::create_directories(out_dir);
  write_manifest(command, resolved, out_dir);
  if (command == "simulate") {
    cmd_simulate(resolved, out_dir, log);
  } else if (command == "estimate") {
    cmd_estimate(resolved, out_dir, log);
  } else if (command == "forecast") {
    cmd_forecast(resolved, out_dir, log);
  } else if (command == "rolling") {
    cmd_rolling(resolved, out_dir, log);
  } else if (command == "report") {
    cmd_report(resolved, out_dir, log);
  } else {
    throw std::invalid_argument("unknown command '" + command + "'");
  }
}

void replay(const fs::path& manifest, const fs::path& out_dir, std::ostream& log) {
  const Config m = Config::load(manifest.string());
  const std::string command = m.require("command");
  run(command, resolve(command, m, std::nullopt, false), out_dir, log);
}

std::string parameter_table(const std::vector<FitResult>& fits) {
  std::vector<std::string> rows;
  for (const auto& f : fits) {
    for (const auto& n : f.names) {
      if (std::find(rows.begin(), rows.end(), n) == rows.end()) rows.push_back(n);
    }
  }
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "");
  out << buf;
  for (const auto& f : fits) {
    std::snprintf(buf, sizeof buf, "%14s", std::string(to_string(f.spec.family)).c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& name : rows) {
    std::string est, se;
    for (const auto& f : fits) {
      const bool has = std::find(f.names.begin(), f.names.end(), name) != f.names.end();
      std::snprintf(buf, sizeof buf, "%14s", has ? fixed(get_parameter(f.theta, name), 5).c_str() : "");
      est += buf;
      const std::string s = has ? "(" + fixed(f.std_error(name), 5) + ")" : "";
      std::snprintf(buf, sizeof buf, "%14s", s.c_str());
      se += buf;
    }
    std::snprintf(buf, sizeof buf, "%-10s", name.c_str());
    out << buf << est << "\n" << std::string(10, ' ') << se << "\n";
  }
  std::snprintf(buf, sizeof buf, "%-10s", "loglik");
  out << buf;
  for (const auto& f : fits) {
    std::snprintf(buf, sizeof buf, "%14s", fixed(f.loglik, 2).c_str());
    out << buf;
  }
  out << "\n";
  return out.str();
}

std::string metric_table(const ForecastReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "sample: " << report.sample << "\n";
  for (Target t : {Target::RV, Target::IV, Target::X}) {
    const auto& grid = t == Target::RV ? report.horizons.rv : report.horizons.x_iv;
    out << "\n" << to_string(t) << "\n";
    std::snprintf(buf, sizeof buf, "%-6s%-10s", "", "");
    out << buf;
    for (int h : grid) {
      std::snprintf(buf, sizeof buf, "%12s", ("h=" + std::to_string(h)).c_str());
      out << buf;
    }
    out << "\n";
    auto metric_row = [&](const char* label, auto pick) {
      for (Family m : report.models) {
        std::snprintf(buf, sizeof buf, "%-6s%-10s", label, std::string(to_string(m)).c_str());
        out << buf;
        for (int h : grid) {
          std::string cell = "-";
          for (const auto& r : report.metrics) {
            if (r.model == m && r.target == t && r.horizon == h) cell = pick(r.value);
          }
          std::snprintf(buf, sizeof buf, "%12s", cell.c_str());
          out << buf;
        }
        out << "\n";
      }
    };
    metric_row("MSE", [](const Metrics& m) { return fixed(m.rmse * m.rmse, 6); });
    metric_row("MAE", [](const Metrics& m) { return fixed(m.mae, 6); });
    metric_row("NMSE", [](const Metrics& m) { return fixed(100.0 * m.nmse, 1) + "%"; });
    metric_row("DIR", [](const Metrics& m) { return fixed(m.dir, 5); });
    const std::pair<Family, Family> pairs[] = {
        {Family::RW, Family::LN}, {Family::RW, Family::NL}, {Family::LN, Family::NL}};
    for (const auto& [small, big] : pairs) {
      std::string label = std::string(to_string(big)) + "/" + std::string(to_string(small));
      std::snprintf(buf, sizeof buf, "%-6s%-10s", "CW", label.c_str());
      std::string line = buf;
      bool any = false;
      for (int h : grid) {
        std::string cell = "-";
        for (const auto& r : report.clark_west) {
          if (r.small == small && r.big == big && r.target == t && r.horizon == h) {
            cell = fixed(r.value.p_value, 5);
            any = true;
          }
        }
        std::snprintf(buf, sizeof buf, "%12s", cell.c_str());
        line += buf;
      }
      if (any) out << line << "\n";
    }
  }
  return out.str();
}

}  // namespace nlsv::app
