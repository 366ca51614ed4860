#pragma once

// Two-factor stochastic volatility model: log price X and instantaneous
// variance V following a GARCH diffusion.
//
//   dX = (r - V/2) dt + sqrt(V) (rho dW^V + sqrt(1 - rho^2) dW^X)   under Q
//   dV = (b0_q + b1_q V) dt + sigma V dW^V
//
// Under P the drift is replaced by mu^P = mu^Q + D f, where f is the excess
// drift of the chosen family (LN or NL) and D is the dampening factor that
// keeps the market price of risk bounded. D is numerically one on any
// reasonable compact set, so estimation works with the undampened drift.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nlsv {

inline constexpr double kTradingDaysPerYear = 262.0;
inline constexpr double kDay = 1.0 / kTradingDaysPerYear;
inline constexpr double kSwapDays = 22.0;
/// Horizon of the implied variance index (one trading month), in years.
inline constexpr double kSwapHorizon = kSwapDays / kTradingDaysPerYear;

inline constexpr double kDefaultRate = 0.05;
inline constexpr double kDefaultDampening = 1e-6;

enum class Family { RW, LN, NL };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct ModelSpec {
  Family family = Family::LN;

  /// Number of variance-drift basis functions, L_M + 1.
  std::size_t basis_count() const;

  static ModelSpec rw() { return {Family::RW}; }
  static ModelSpec ln() { return {Family::LN}; }
  static ModelSpec nl() { return {Family::NL}; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Full parameter vector theta. b0 is only used by NL; LN uses b0_q as its
/// physical variance intercept. r and c are fixed configuration inputs.
struct ParamVector {
  double sigma = 1.0;
  double rho = 0.0;
  double b0_q = 0.0;
  double b1_q = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;
  double r = kDefaultRate;
  double c = kDefaultDampening;

  /// Throws std::invalid_argument unless sigma > 0, |rho| < 1, b0_q > 0 and
  /// every field is finite.
  void validate() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Names of the estimated coordinates, in a fixed order per family.
const std::vector<std::string>& parameter_names(const ModelSpec& spec);
double get_parameter(const ParamVector& theta, std::string_view name);
void set_parameter(ParamVector& theta, std::string_view name, double value);

/// The four disjoint parameter groups used by the limited-information
/// estimator: shared (sigma group), risk-neutral only, stock drift under P,
/// variance drift under P.
struct ParameterPartition {
  std::vector<std::string> shared;
  std::vector<std::string> risk_neutral;
  std::vector<std::string> stock_physical;
  std::vector<std::string> variance_physical;
};

ParameterPartition partition(const ModelSpec& spec);

/// Full-sample estimates on daily S&P 100 / VXO data, used as defaults
/// for simulation and as test anchors.
ParamVector reference_ln_parameters();
ParamVector reference_nl_parameters();

struct State {
  double x = 0.0;
  double v = 0.0;
};

/// State with the variance held as y = log(v) / sigma.
struct LogState {
  double x = 0.0;
  double y = 0.0;
};

enum class Dampening { off, on };

Eigen::Vector2d drift_q(const State& s, const ParamVector& theta);
Eigen::Vector2d drift_p(const State& s, const ParamVector& theta,
                        const ModelSpec& spec,
                        Dampening dampening = Dampening::off);
/// f such that drift_p = drift_q + f (undampened).
Eigen::Vector2d excess_drift(const State& s, const ParamVector& theta,
                             const ModelSpec& spec);

/// Diffusion matrix of (X, V) with columns (W^X, W^V).
Eigen::Matrix2d diffusion_matrix(const State& s, const ParamVector& theta);

/// exp(-c / |det Sigma| - c * sum_j |f_j|), in (0, 1].
double dampening(const State& s, const ParamVector& theta,
                 const ModelSpec& spec);

/// Sigma^{-1} f, optionally scaled by the dampening factor. The second
/// component is the variance risk premium.
Eigen::Vector2d market_price_of_risk(const State& s, const ParamVector& theta,
                                     const ModelSpec& spec,
                                     Dampening dampening = Dampening::off);

double gamma_transform(double v, double sigma);
double gamma_inverse(double y, double sigma);

/// Coefficients of the variance swap rate: (1/Delta) E^Q[int V ds] = A + B V.
struct SwapCoefficients {
  double a = 0.0;
  double b = 1.0;
};

SwapCoefficients swap_coefficients(const ParamVector& theta, double delta);

/// Thrown when an implied variance maps onto a non-positive instantaneous
/// variance under the current parameters.
class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double iv_to_v(double iv, const SwapCoefficients& coeffs);
double v_to_iv(double v, const SwapCoefficients& coeffs);
double iv_to_v(double iv, const ParamVector& theta, double delta);
double v_to_iv(double v, const ParamVector& theta, double delta);

/// Local (X, Y) dynamics, Y = log(V) / sigma. The Y equation has unit
/// diffusion; the X row is sqrt(V) (sqrt(1 - rho^2), rho).
class LogDynamics {
 public:
  enum class Measure { physical, risk_neutral };

  LogDynamics(const ParamVector& theta, const ModelSpec& spec,
              Measure measure = Measure::physical,
              Dampening dampening = Dampening::off);

  const ParamVector& params() const { return theta_; }
  const ModelSpec& spec() const { return spec_; }
  Measure measure() const { return measure_; }

  Eigen::Vector2d drift(const LogState& u) const;
  Eigen::Matrix2d diffusion(const LogState& u) const;

  /// Drift of Y only.
  double variance_drift(double y) const;

 private:
  ParamVector theta_;
  ModelSpec spec_;
  Measure measure_;
  Dampening dampening_;
  double sqrt_one_minus_rho2_;
};

}  // namespace nlsv
