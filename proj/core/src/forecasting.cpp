#include "nlsv/forecasting.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>

namespace nlsv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int sign(double v) { return (v > 0.0) - (v < 0.0); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

ModelSpec spec_of(Family f) { return ModelSpec{f}; }

}  // namespace

int HorizonGrid::max_horizon() const {
  int out = 0;
  for (int h : x_iv) out = std::max(out, h);
  for (int h : rv) out = std::max(out, h);
  return out;
}

std::vector<int> HorizonGrid::all() const {
  std::set<int> s(x_iv.begin(), x_iv.end());
  s.insert(rv.begin(), rv.end());
  return {s.begin(), s.end()};
}

std::string_view to_string(Target target) {
  switch (target) {
    case Target::RV: return "RV";
    case Target::IV: return "IV";
    case Target::X: return "X";
  }
  return "?";
}

Target target_from_string(std::string_view name) {
  if (name == "RV") return Target::RV;
  if (name == "IV") return Target::IV;
  if (name == "X") return Target::X;
  throw std::invalid_argument("unknown forecast target '" + std::string(name) + "'");
}

double realized_variance(std::span<const double> x, std::size_t i, int n_days) {
  if (n_days < 1) throw std::invalid_argument("RV window must be >= 1 day");
  const auto n = static_cast<std::size_t>(n_days);
  if (i < n || i >= x.size()) {
    throw std::out_of_range("not enough history for a " + std::to_string(n_days) +
                            "-day realized variance at index " + std::to_string(i));
  }
  double sum = 0.0;
  for (std::size_t j = i - n + 1; j <= i; ++j) {
    const double d = x[j] - x[j - 1];
    sum += d * d;
  }
  return kTradingDaysPerYear / static_cast<double>(n_days) * sum;
}

double realized_variance(const ObservedSeries& series, std::size_t i, int n_days) {
  return realized_variance(std::span<const double>(series.x), i, n_days);
}

double model_realized_variance(std::span<const double> v, std::size_t i, int n_days) {
  if (n_days < 1) throw std::invalid_argument("RV window must be >= 1 day");
  const auto n = static_cast<std::size_t>(n_days);
  if (i < n || i >= v.size()) {
    throw std::out_of_range("not enough history for a " + std::to_string(n_days) +
                            "-day model variance at index " + std::to_string(i));
  }
  double sum = 0.0;
  for (std::size_t j = i - n + 1; j <= i; ++j) sum += v[j];
  return sum / static_cast<double>(n_days);
}

std::vector<TargetForecast> forecast_targets(const ForecastOrigin& now,
                                             const ParamVector& theta,
                                             const ModelSpec& spec,
                                             std::span<const int> horizons,
                                             const ForecastOptions& options,
                                             const RngStream& rng) {
  for (int h : horizons) {
    if (h < 0) throw std::invalid_argument("forecast horizon must be non-negative");
  }
  std::vector<TargetForecast> out(horizons.size());
  for (std::size_t k = 0; k < horizons.size(); ++k) out[k].horizon = horizons[k];

  if (spec.family == Family::RW) {
    for (auto& f : out) {
      f.x = now.x;
      f.iv = now.iv;
      f.rv = now.iv;
    }
    return out;
  }

  if (options.n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
  if (!(options.dt > 0.0) || options.dt > kDay) {
    throw std::invalid_argument("simulation step must be in (0, 1 day]");
  }
  const SwapCoefficients coeffs = swap_coefficients(theta, kSwapHorizon);
  const double v0 = iv_to_v(now.iv, coeffs);
  const int max_h = horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
  const auto per_day = static_cast<int>(std::llround(kDay / options.dt));
  const double dt = kDay / per_day;
  const double sd = std::sqrt(dt);
  const LogDynamics dyn(theta, spec, Measure::physical);
  const LogState start{now.x, gamma_transform(v0, theta.sigma)};

  // Per-path values at each horizon: x, V, running mean of daily V.
  const std::size_t nh = horizons.size();
  const std::size_t n_paths = options.n_paths;
  std::vector<double> px(n_paths * nh), pv(n_paths * nh), prv(n_paths * nh);
  detail::parallel_for(n_paths, options.workers, [&](std::size_t p) {
    RngStream stream = rng.substream(static_cast<std::uint32_t>(p));
    LogState u = start;
    std::vector<double> cum(static_cast<std::size_t>(max_h) + 1, 0.0);
    std::vector<LogState> at(static_cast<std::size_t>(max_h) + 1);
    at[0] = start;
    for (int d = 1; d <= max_h; ++d) {
      for (int k = 0; k < per_day; ++k) {
        const double ex = stream.normal() * sd;
        const double ev = stream.normal() * sd;
        u = euler_step(u, dyn, dt, {ex, ev});
      }
      at[static_cast<std::size_t>(d)] = u;
      cum[static_cast<std::size_t>(d)] =
          cum[static_cast<std::size_t>(d) - 1] + gamma_inverse(u.y, theta.sigma);
    }
    for (std::size_t k = 0; k < nh; ++k) {
      const auto h = static_cast<std::size_t>(horizons[k]);
      px[p * nh + k] = at[h].x;
      pv[p * nh + k] = gamma_inverse(at[h].y, theta.sigma);
      prv[p * nh + k] = h == 0 ? v0 : cum[h] / static_cast<double>(h);
    }
  });

  const double n = static_cast<double>(n_paths);
  auto moments = [&](const std::vector<double>& data, std::size_t k, double& mean, double& se) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double v = data[p * nh + k];
      s += v;
      s2 += v * v;
    }
    mean = s / n;
    se = n > 1 ? std::sqrt(std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) / n) : 0.0;
  };
  for (std::size_t k = 0; k < nh; ++k) {
    double ev = 0.0, ev_se = 0.0;
    moments(px, k, out[k].x, out[k].x_se);
    moments(pv, k, ev, ev_se);
    moments(prv, k, out[k].rv, out[k].rv_se);
    out[k].iv = coeffs.a + coeffs.b * ev;
    out[k].iv_se = coeffs.b * ev_se;
  }
  return out;
}

Metrics metrics(std::span<const double> forecast, std::span<const double> realized,
                std::span<const double> reference) {
  if (forecast.empty()) throw std::invalid_argument("metrics need at least one forecast");
  if (forecast.size() != realized.size() || forecast.size() != reference.size()) {
    throw std::invalid_argument("forecast, realized and reference lengths differ");
  }
  const std::size_t n = forecast.size();
  double abs_sum = 0.0, sq_sum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = realized[i] - forecast[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    mean += realized[i];
  }
  mean /= static_cast<double>(n);
  double disp = 0.0;
  for (double r : realized) disp += (r - mean) * (r - mean);

  std::size_t hits = 0, counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(reference[i])) continue;
    ++counted;
    if (sign(forecast[i] - reference[i]) == sign(realized[i] - reference[i])) ++hits;
  }

  Metrics m;
  m.n = n;
  m.mae = abs_sum / static_cast<double>(n);
  m.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  m.nmse = disp > 0.0 ? sq_sum / disp : (sq_sum == 0.0 ? 0.0 : kNaN);
  m.dir = counted > 0 ? static_cast<double>(hits) / static_cast<double>(counted) : kNaN;
  return m;
}

ClarkWest clark_west(std::span<const double> e_small, std::span<const double> e_big,
                     std::span<const double> yhat_small, std::span<const double> yhat_big,
                     int horizon_days) {
  const std::size_t n = e_small.size();
  if (n == 0 || e_big.size() != n || yhat_small.size() != n || yhat_big.size() != n) {
    throw std::invalid_argument("Clark-West inputs must be non-empty and aligned");
  }
  if (horizon_days < 1) throw std::invalid_argument("horizon must be >= 1 day");
  std::vector<double> f(n);
  bool all_zero = true;
  for (std::size_t t = 0; t < n; ++t) {
    const double d = yhat_small[t] - yhat_big[t];
    f[t] = e_small[t] * e_small[t] - e_big[t] * e_big[t] + d * d;
    all_zero = all_zero && f[t] == 0.0;
  }
  ClarkWest out;
  if (all_zero) {
    out.degenerate = true;
    return out;
  }
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(n);

  const auto lag = std::min<std::size_t>(static_cast<std::size_t>(horizon_days - 1), n - 1);
  auto autocov = [&](std::size_t l) {
    double s = 0.0;
    for (std::size_t t = l; t < n; ++t) s += (f[t] - mean) * (f[t - l] - mean);
    return s / static_cast<double>(n);
  };
  double lrv = autocov(0);
  for (std::size_t l = 1; l <= lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / static_cast<double>(lag + 1);
    lrv += 2.0 * w * autocov(l);
  }
  if (!(lrv > 0.0)) {
    out.degenerate = true;
    out.statistic = mean > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    out.p_value = mean > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.statistic = mean / std::sqrt(lrv / static_cast<double>(n));
  out.p_value = normal_upper_tail(out.statistic);
  return out;
}

std::vector<double> ForecastSeries::residuals() const {
  std::vector<double> e(forecast.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = realized[i] - forecast[i];
  return e;
}

const ForecastSeries* ForecastReport::find(Family model, Target target, int horizon) const {
  for (const auto& s : series) {
    if (s.model == model && s.target == target && s.horizon == horizon) return &s;
  }
  return nullptr;
}

ForecastAccumulator::ForecastAccumulator(const ObservedSeries& series,
                                         std::vector<Family> models, HorizonGrid horizons,
                                         std::string sample)
    : series_(series) {
  report_.sample = std::move(sample);
  report_.horizons = std::move(horizons);
  report_.models = std::move(models);
  for (Family m : report_.models) {
    for (Target t : {Target::RV, Target::IV, Target::X}) {
      const auto& grid = t == Target::RV ? report_.horizons.rv : report_.horizons.x_iv;
      for (int h : grid) {
        ForecastSeries s;
        s.model = m;
        s.target = t;
        s.horizon = h;
        report_.series.push_back(std::move(s));
      }
    }
  }
}

ForecastSeries& ForecastAccumulator::slot(Family model, Target target, int horizon) {
  for (auto& s : report_.series) {
    if (s.model == model && s.target == target && s.horizon == horizon) return s;
  }
  throw std::logic_error("forecast series not registered");
}

void ForecastAccumulator::add_origin(std::size_t t, std::span<const ModelParameters> params,
                                     const ForecastOptions& options, const RngStream& rng) {
  if (t >= series_.size()) throw std::out_of_range("forecast origin outside the series");
  std::vector<int> horizons;
  for (int h : report_.horizons.all()) {
    if (t + static_cast<std::size_t>(h) < series_.size()) horizons.push_back(h);
  }
  if (horizons.empty()) return;

  // Forecast every model before recording anything, so a failure leaves the
  // series aligned across models.
  const ForecastOrigin now{series_.x[t], series_.iv[t]};
  std::vector<std::vector<TargetForecast>> all;
  for (Family m : report_.models) {
    ParamVector theta;
    if (m != Family::RW) {
      auto it = std::find_if(params.begin(), params.end(),
                             [m](const ModelParameters& p) { return p.family == m; });
      if (it == params.end()) throw std::invalid_argument("missing parameters for a model");
      theta = it->theta;
    }
    all.push_back(forecast_targets(now, theta, spec_of(m), horizons, options, rng));
  }
  for (std::size_t j = 0; j < report_.models.size(); ++j) {
    const Family m = report_.models[j];
    for (const auto& f : all[j]) {
      const auto h = static_cast<std::size_t>(f.horizon);
      const std::size_t end = t + h;
      auto add = [&](Target target, double forecast, double realized, double reference) {
        auto& s = slot(m, target, f.horizon);
        s.origin.push_back(t);
        s.forecast.push_back(forecast);
        s.realized.push_back(realized);
        s.reference.push_back(reference);
      };
      const auto& xiv = report_.horizons.x_iv;
      if (std::find(xiv.begin(), xiv.end(), f.horizon) != xiv.end()) {
        add(Target::X, f.x, series_.x[end], series_.x[t]);
        add(Target::IV, f.iv, series_.iv[end], series_.iv[t]);
      }
      const auto& rvg = report_.horizons.rv;
      if (f.horizon > 0 && std::find(rvg.begin(), rvg.end(), f.horizon) != rvg.end()) {
        const double ref = t >= h ? realized_variance(series_, t, f.horizon) : kNaN;
        add(Target::RV, f.rv, realized_variance(series_, end, f.horizon), ref);
      }
    }
  }
}

void summarize(ForecastReport& report) {
  report.metrics.clear();
  report.clark_west.clear();
  for (const auto& s : report.series) {
    if (s.forecast.empty()) continue;
    report.metrics.push_back({s.model, s.target, s.horizon,
                              metrics(s.forecast, s.realized, s.reference)});
  }
  const std::pair<Family, Family> pairs[] = {
      {Family::RW, Family::LN}, {Family::RW, Family::NL}, {Family::LN, Family::NL}};
  for (const auto& [small, big] : pairs) {
    for (const auto& s : report.series) {
      if (s.model != small || s.forecast.empty()) continue;
      const ForecastSeries* b = report.find(big, s.target, s.horizon);
      if (b == nullptr || b->forecast.size() != s.forecast.size()) continue;
      report.clark_west.push_back({s.target, s.horizon, small, big,
                                   clark_west(s.residuals(), b->residuals(), s.forecast,
                                              b->forecast, std::max(1, s.horizon))});
    }
  }
}

ForecastReport ForecastAccumulator::finish() const {
  ForecastReport out = report_;
  summarize(out);
  return out;
}

ForecastReport evaluate_forecasts(const ObservedSeries& series, std::size_t begin,
                                  std::size_t end, std::span<const ModelParameters> params,
                                  const HorizonGrid& horizons, const ForecastOptions& options,
                                  std::uint64_t seed, const std::string& sample) {
  if (begin > end || end > series.size()) throw std::out_of_range("origin range out of bounds");
  std::vector<Family> models{Family::RW};
  for (const auto& p : params) {
    if (p.family != Family::RW) models.push_back(p.family);
  }
  ForecastAccumulator acc(series, models, horizons, sample);
  for (std::size_t t = begin; t < end; ++t) {
    acc.add_origin(t, params, options, RngStream(seed, t));
  }
  return acc.finish();
}

RollingResult rolling_evaluation(const ObservedSeries& series, const std::string& split_date,
                                 const RollingConfig& config) {
  series.validate();
  const SampleSplit cut = split(series, split_date);
  if (config.refit_every == 0) throw std::invalid_argument("refit_every must be >= 1");
  const std::size_t width = config.window > 0 ? config.window : cut.in_size();

  RollingResult out;
  ForecastAccumulator acc(series, config.models, config.horizons, "out");
  std::vector<std::optional<ModelParameters>> current(config.models.size());

  for (std::size_t t = cut.out_begin; t < cut.out_end; ++t) {
    const std::size_t k = t - cut.out_begin;
    const bool refit = k % config.refit_every == 0;
    if (refit) {
      // Window ends at the origin, so the fit uses no future data.
      const std::size_t lo = config.fixed_window && t + 1 > width ? t + 1 - width : 0;
      const ObservedSeries window = series.slice(lo, t + 1);
      for (std::size_t j = 0; j < config.models.size(); ++j) {
        const Family m = config.models[j];
        if (m == Family::RW) continue;
        LikelihoodConfig fc = config.fit;
        std::optional<ParamVector> init;
        if (current[j]) {
          init = current[j]->theta;
          fc.restarts = config.warm_restarts;
        }
        try {
          FitResult r = fit(window, spec_of(m), fc, init);
          if (!std::isfinite(r.loglik)) throw EstimationError(r.diagnostics.message);
          current[j] = ModelParameters{m, r.theta};
          out.parameter_paths.push_back(
              {series.dates[t], m, r.theta, r.loglik, r.diagnostics.converged});
        } catch (const std::exception& e) {
          out.failures.push_back({series.dates[t], m, e.what()});
        }
      }
    }
    bool ready = true;
    std::vector<ModelParameters> params;
    for (std::size_t j = 0; j < config.models.size(); ++j) {
      if (config.models[j] == Family::RW) continue;
      if (!current[j]) {
        ready = false;
        break;
      }
      params.push_back(*current[j]);
    }
    if (!ready) continue;
    try {
      acc.add_origin(t, params, config.forecast, RngStream(config.seed, t));
    } catch (const DomainViolation& e) {
      out.failures.push_back({series.dates[t], Family::RW, e.what()});
    }
  }
  out.report = acc.finish();
  return out;
}

std::vector<double> risk_premium_series(const ObservedSeries& series, const ParamVector& theta,
                                        const ModelSpec& spec, Dampening dampening) {
  const SwapCoefficients coeffs = swap_coefficients(theta, kSwapHorizon);
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const State s{series.x[i], iv_to_v(series.iv[i], coeffs)};
    out[i] = market_price_of_risk(s, theta, spec, dampening)(1);
  }
  return out;
}

}  // namespace nlsv
