#pragma once

// Observed-data likelihood for (X, IV) and the nested estimation procedure.
//
// The implied variance is mapped to V = (IV - A)/B and then to Y = log(V)/sigma,
// so the log-likelihood is
//
//   l(theta) = sum_i [log p(X_i, Y_i | X_{i-1}, Y_{i-1}) - sigma Y_i]
//              - N (log B + log sigma)
//
// with p approximated by simulated maximum likelihood: an importance-sampled
// product of Euler densities over M - 1 bridge points drawn from the
// modified Brownian bridge.

#include "nlsv/eml.hpp"
#include "nlsv/model.hpp"
#include "nlsv/rng.hpp"
#include "nlsv/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace nlsv {

struct LikelihoodConfig {
  int m = 24;                 ///< M
  int s = 576;                ///< simulation draws per transition, M^2 by default
  int n_bridges = 576;        ///< EML bridge draws per interval
  double delta = kDay;        ///< observation spacing, years
  std::uint64_t seed = 20240101;
  std::size_t min_observations = 200;
  std::size_t max_iterations = 400;
  double size_tolerance = 1e-4;
  int restarts = 3;           ///< jittered starting points of the outer search
  double fd_step = 1e-5;      ///< score differences, transformed coordinates
  double hessian_step = 0.1;  ///< in units of the OPG-implied standard deviation
  unsigned workers = 1;

  void validate() const;
  EmlConfig eml() const;
};

/// Log of the bivariate normal Euler density of `next` given `curr`.
template <class Dynamics>
double euler_log_density_of(const LogState& next, const LogState& curr,
                            const Dynamics& dyn, double delta) {
  const Eigen::Vector2d mu = dyn.drift(curr);
  const Eigen::Matrix2d s = dyn.diffusion(curr);
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double dx = next.x - curr.x - mu(0) * delta;
  const double dy = next.y - curr.y - mu(1) * delta;
  // z = Sigma^{-1} d
  const double z0 = (s(1, 1) * dx - s(0, 1) * dy) / det;
  const double z1 = (-s(1, 0) * dx + s(0, 0) * dy) / det;
  return -std::log(2.0 * std::numbers::pi) - std::log(std::abs(det)) - std::log(delta) -
         0.5 * (z0 * z0 + z1 * z1) / delta;
}

/// Log density of the modified-bridge proposal for step m -> m + 1
/// (0 <= m < M - 1) towards `end`.
template <class DiffusionFn>
double proposal_log_density_of(const LogState& next, const LogState& curr,
                               const LogState& end, int m, int m_count, double delta,
                               DiffusionFn&& diffusion) {
  const double left = static_cast<double>(m_count - m);
  const double k = (left - 1.0) / left;
  const Eigen::Matrix2d s = diffusion(curr);
  const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  const double dx = next.x - curr.x - (end.x - curr.x) / left;
  const double dy = next.y - curr.y - (end.y - curr.y) / left;
  const double z0 = (s(1, 1) * dx - s(0, 1) * dy) / det;
  const double z1 = (-s(1, 0) * dx + s(0, 0) * dy) / det;
  return -std::log(2.0 * std::numbers::pi) - std::log(std::abs(det)) - std::log(k * delta) -
         0.5 * (z0 * z0 + z1 * z1) / (k * delta);
}

double euler_density(const LogState& next, const LogState& curr,
                     const ParamVector& theta, const ModelSpec& spec, double delta);

double proposal_density_q(const LogState& next, const LogState& curr,
                          const LogState& end, const ParamVector& theta, int m,
                          int m_count, double delta);

struct SmlEstimate {
  double log_density = 0.0;
  /// Standard error of the density estimate relative to the estimate.
  double relative_std_error = 0.0;
};

/// Importance-sampling estimate of log p(to | from) over a step of length
/// delta with m_count Euler sub-steps and s_draws bridge draws.
template <class Dynamics>
SmlEstimate sml_log_density_of(const Dynamics& dyn, const LogState& from,
                               const LogState& to, double delta, int m_count,
                               int s_draws, RngStream& rng) {
  const double step = delta / m_count;
  if (m_count == 1) return {euler_log_density_of(to, from, dyn, step), 0.0};
  const double sd = std::sqrt(step);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  std::vector<double> logw(static_cast<std::size_t>(s_draws));
  for (int s = 0; s < s_draws; ++s) {
    LogState u = from;
    double acc = 0.0;
    for (int m = 0; m + 1 < m_count; ++m) {
      const double left = static_cast<double>(m_count - m);
      const double k = (left - 1.0) / left;
      const double ex = rng.normal();
      const double ev = rng.normal();
      const Eigen::Matrix2d sig = dyn.diffusion(u);
      const double scale = std::sqrt(k) * sd;
      LogState next;
      next.x = u.x + (to.x - u.x) / left + scale * (sig(0, 0) * ex + sig(0, 1) * ev);
      next.y = u.y + (to.y - u.y) / left + scale * (sig(1, 0) * ex + sig(1, 1) * ev);
      const double det = sig(0, 0) * sig(1, 1) - sig(0, 1) * sig(1, 0);
      const double log_q =
          -log_2pi - std::log(std::abs(det)) - std::log(k * step) - 0.5 * (ex * ex + ev * ev);
      acc += euler_log_density_of(next, u, dyn, step) - log_q;
      u = next;
    }
    acc += euler_log_density_of(to, u, dyn, step);
    logw[static_cast<std::size_t>(s)] = acc;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double w : logw) top = std::max(top, w);
  if (!std::isfinite(top)) {
    return {-std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : logw) {
    const double e = std::exp(w - top);
    sum += e;
    sum_sq += e * e;
  }
  const double n = static_cast<double>(s_draws);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0)) : 0.0;
  return {top + std::log(mean), std::sqrt(var / n) / mean};
}

SmlEstimate sml_transition_logdensity(const LogState& from, const LogState& to,
                                      const ParamVector& theta, const ModelSpec& spec,
                                      const LikelihoodConfig& config, RngStream& rng);

/// Observations mapped to (X, Y) under theta. Throws DomainViolation if some
/// implied variance maps to a non-positive V.
std::vector<LogState> observed_log_states(const ObservedSeries& series,
                                          const ParamVector& theta);

struct LoglikResult {
  double value = 0.0;
  /// Per-interval contributions, i = 1..N (size N).
  std::vector<double> contributions;
  std::size_t failed_intervals = 0;
};

/// Returns value = -inf (with failed_intervals > 0) instead of throwing when
/// theta is inconsistent with the data.
LoglikResult total_loglik(const ObservedSeries& series, const ParamVector& theta,
                          const ModelSpec& spec, const LikelihoodConfig& config);

/// EML drift parameters for fixed (sigma, rho, b0_q, b1_q).
ParamVector profile_drifts(const ObservedSeries& series, const ParamVector& theta,
                           const ModelSpec& spec, const LikelihoodConfig& config);

/// Moment-based starting point: sigma from the volatility of log IV, rho
/// from the correlation of returns with log IV changes, (b0_q, b1_q) by
/// inverting A and B from a regression of squared returns on IV.
ParamVector moment_initial_guess(const ObservedSeries& series, double rate = kDefaultRate);

struct SandwichResult {
  std::vector<std::string> names;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd hessian;  ///< transformed coordinates
  Eigen::MatrixXd opg;      ///< transformed coordinates
};

/// Huber sandwich covariance H^{-1} OPG H^{-1} of all estimated parameters,
/// mapped back to natural coordinates. Throws EstimationError if the
/// Hessian is singular.
SandwichResult sandwich_errors(const ObservedSeries& series, const ParamVector& theta,
                               const ModelSpec& spec, const LikelihoodConfig& config);

struct FitDiagnostics {
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  int starts = 0;
  std::string message;
};

struct FitResult {
  ModelSpec spec;
  ParamVector theta;
  double loglik = 0.0;
  std::size_t n_observations = 0;
  std::vector<std::string> names;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  bool covariance_ok = false;
  std::string covariance_message;
  FitDiagnostics diagnostics;
  LikelihoodConfig config;

  /// NaN if the parameter is not estimated or the covariance failed.
  double std_error(std::string_view name) const;
};

/// Outer simplex search over (sigma, rho, b0_q, b1_q) with the drift
/// parameters profiled out by EML at every trial point.
FitResult fit(const ObservedSeries& series, const ModelSpec& spec,
              const LikelihoodConfig& config,
              const std::optional<ParamVector>& init = std::nullopt);

}  // namespace nlsv
