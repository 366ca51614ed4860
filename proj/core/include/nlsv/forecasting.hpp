#pragma once

// Out-of-sample forecasting of realized variance, implied variance and the
// log price, forecast evaluation and the Clark-West test for nested models.

#include "nlsv/likelihood.hpp"
#include "nlsv/model.hpp"
#include "nlsv/rng.hpp"
#include "nlsv/series.hpp"
#include "nlsv/simulation.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nlsv {

/// Horizons in trading days.
struct HorizonGrid {
  std::vector<int> x_iv{1, 5, 22, 66, 131};
  std::vector<int> rv{5, 22, 66, 131};

  int max_horizon() const;
  /// Sorted union of both grids.
  std::vector<int> all() const;
};

inline constexpr std::size_t kForecastPaths = 20000;

enum class Target { RV, IV, X };
std::string_view to_string(Target target);
Target target_from_string(std::string_view name);

/// RV_i(n) = (262/n) sum_{j=i-n+1..i} (x_j - x_{j-1})^2. Requires i >= n.
double realized_variance(std::span<const double> x, std::size_t i, int n_days);
double realized_variance(const ObservedSeries& series, std::size_t i, int n_days);

/// (1/n) sum_{j=i-n+1..i} v_j. Requires i >= n.
double model_realized_variance(std::span<const double> v, std::size_t i, int n_days);

struct ForecastOptions {
  std::size_t n_paths = kForecastPaths;
  double dt = kHourlyStep;
  unsigned workers = 1;
};

/// Current observables at a forecast origin.
struct ForecastOrigin {
  double x = 0.0;
  double iv = 0.0;
};

struct TargetForecast {
  int horizon = 0;
  double x = 0.0;
  double iv = 0.0;
  double rv = 0.0;
  double x_se = 0.0;
  double iv_se = 0.0;
  double rv_se = 0.0;
};

/// Conditional expectations of X_{t+h}, IV_{t+h} and RV_{t+h}(h) under P for
/// every h in `horizons`, from a single simulation pass. The random walk
/// returns current values (the current IV standing in for RV). Models
/// called with the same rng consume identical innovations.
std::vector<TargetForecast> forecast_targets(const ForecastOrigin& now,
                                             const ParamVector& theta,
                                             const ModelSpec& spec,
                                             std::span<const int> horizons,
                                             const ForecastOptions& options,
                                             const RngStream& rng);

struct Metrics {
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double nmse = 0.0;  ///< fraction, 1.0 = 100%
  double dir = 0.0;   ///< NaN if no observation has a reference value
};

/// Residuals are realized - forecast. NMSE divides the squared-error sum by
/// the dispersion of the realized values around their mean. DIR compares
/// the sign of forecast - reference with realized - reference; a predicted
/// change of zero is correct only if the realized change is zero too.
/// Observations with a non-finite reference are left out of DIR.
Metrics metrics(std::span<const double> forecast, std::span<const double> realized,
                std::span<const double> reference);

struct ClarkWest {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;
};

/// MSPE-adjusted test of a nested (small) against a nesting (big) model.
/// One-sided, Bartlett HAC variance with lag horizon_days - 1.
ClarkWest clark_west(std::span<const double> e_small, std::span<const double> e_big,
                     std::span<const double> yhat_small, std::span<const double> yhat_big,
                     int horizon_days);

/// Forecasts of one model for one target and horizon, aligned by origin.
struct ForecastSeries {
  Family model = Family::RW;
  Target target = Target::X;
  int horizon = 0;
  std::vector<std::size_t> origin;
  std::vector<double> forecast;
  std::vector<double> realized;
  std::vector<double> reference;

  std::vector<double> residuals() const;
};

struct MetricsRow {
  Family model = Family::RW;
  Target target = Target::X;
  int horizon = 0;
  Metrics value;
};

struct ClarkWestRow {
  Target target = Target::X;
  int horizon = 0;
  Family small = Family::RW;
  Family big = Family::LN;
  ClarkWest value;
};

struct ForecastReport {
  std::string sample;  ///< "in" or "out"
  HorizonGrid horizons;
  std::vector<Family> models;
  std::vector<ForecastSeries> series;
  std::vector<MetricsRow> metrics;
  std::vector<ClarkWestRow> clark_west;

  const ForecastSeries* find(Family model, Target target, int horizon) const;
};

/// One set of parameters per model. RW needs no parameters.
struct ModelParameters {
  Family family = Family::RW;
  ParamVector theta;
};

/// Collects forecasts origin by origin and fills in metrics at the end.
class ForecastAccumulator {
 public:
  ForecastAccumulator(const ObservedSeries& series, std::vector<Family> models,
                      HorizonGrid horizons, std::string sample);

  /// Forecasts from origin t for every model. All models see the same rng.
  /// Horizons reaching past the end of the series are skipped.
  void add_origin(std::size_t t, std::span<const ModelParameters> params,
                  const ForecastOptions& options, const RngStream& rng);

  /// Metrics per series and Clark-West p-values for the nested pairs
  /// (LN vs RW, NL vs RW, NL vs LN) among the models present.
  ForecastReport finish() const;

 private:
  ForecastSeries& slot(Family model, Target target, int horizon);

  const ObservedSeries& series_;
  ForecastReport report_;
};

void summarize(ForecastReport& report);

/// Forecast evaluation with fixed parameters at origins [begin, end).
ForecastReport evaluate_forecasts(const ObservedSeries& series, std::size_t begin,
                                  std::size_t end, std::span<const ModelParameters> params,
                                  const HorizonGrid& horizons, const ForecastOptions& options,
                                  std::uint64_t seed, const std::string& sample = "in");

struct RollingConfig {
  LikelihoodConfig fit;
  ForecastOptions forecast;
  HorizonGrid horizons;
  std::vector<Family> models{Family::RW, Family::LN, Family::NL};
  bool fixed_window = false;  ///< default is an expanding window
  std::size_t window = 0;     ///< fixed-window width, 0 = in-sample length
  std::size_t refit_every = 1;
  /// Simplex restarts for warm-started re-fits.
  int warm_restarts = 1;
  std::uint64_t seed = 20240101;
};

struct ParameterPathRow {
  std::string date;
  Family model = Family::LN;
  ParamVector theta;
  double loglik = 0.0;
  bool converged = false;
};

struct FitFailureRow {
  std::string date;
  Family model = Family::LN;
  std::string message;
};

struct RollingResult {
  ForecastReport report;
  std::vector<ParameterPathRow> parameter_paths;
  std::vector<FitFailureRow> failures;
};

/// Re-estimates each model as the window advances over the out-of-sample
/// part and forecasts from every origin. Re-fits warm-start from the
/// previous estimate. A failed re-fit is recorded and the previous estimate
/// is kept; origins with no usable estimate for some model are skipped.
RollingResult rolling_evaluation(const ObservedSeries& series, const std::string& split_date,
                                 const RollingConfig& config);

/// Variance component of the market price of risk along the implied V path.
std::vector<double> risk_premium_series(const ObservedSeries& series, const ParamVector& theta,
                                        const ModelSpec& spec,
                                        Dampening dampening = Dampening::off);

}  // namespace nlsv
