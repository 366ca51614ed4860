#pragma once

#include "nlsv/model.hpp"
#include "nlsv/rng.hpp"
#include "nlsv/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nlsv {

using Measure = LogDynamics::Measure;

inline constexpr int kDefaultAugmentation = 24;
/// One trading hour, assuming 8 trading hours per day.
inline constexpr double kHourlyStep = kDay / 8.0;

/// One Euler step of the (X, Y) system. eps holds (eps_X, eps_V), each an
/// N(0, dt) draw.
LogState euler_step(const LogState& u, const LogDynamics& dynamics, double dt,
                    const Eigen::Vector2d& eps);
LogState euler_step(const LogState& u, const ParamVector& theta,
                    const ModelSpec& spec, Measure measure, double dt,
                    const Eigen::Vector2d& eps);

/// Row-major block of n_paths paths, each with n_steps + 1 states.
struct PathEnsemble {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  double dt = 0.0;
  std::vector<LogState> states;

  std::span<const LogState> path(std::size_t i) const {
    return {states.data() + i * (n_steps + 1), n_steps + 1};
  }
};

/// Path p draws from rng.substream(p).
PathEnsemble simulate_paths(const LogState& initial, const LogDynamics& dynamics,
                            double dt, std::size_t n_steps, std::size_t n_paths,
                            const RngStream& rng);
PathEnsemble simulate_paths(const LogState& initial, const ParamVector& theta,
                            const ModelSpec& spec, Measure measure, double dt,
                            std::size_t n_steps, std::size_t n_paths,
                            const RngStream& rng);

/// Observed states U_0..U_N with M - 1 auxiliary states per interval.
struct LatticePath {
  std::vector<LogState> observations;
  std::vector<std::vector<LogState>> auxiliary;  // one entry per interval
  int m = 1;

  std::size_t augmented_size() const {
    return observations.empty() ? 0 : m * (observations.size() - 1) + 1;
  }
  /// Flattened U_0, U_{0,1}, ..., U_{0,M-1}, U_1, ...
  std::vector<LogState> flatten() const;
};

/// Bridge recursion between two endpoints:
///   U_{m+1} = U_m + (U_M - U_m)/(M - m) + sqrt((M-m-1)/(M-m)) Sigma(U_m) eps
/// with eps ~ N(0, delta I). Returns the M - 1 interior points; consumes two
/// normals per step in the order (eps_X, eps_V).
template <class DiffusionFn>
std::vector<LogState> bridge_fill(const LogState& from, const LogState& to,
                                  int m_count, double delta, DiffusionFn&& diffusion,
                                  RngStream& rng) {
  std::vector<LogState> out;
  if (m_count <= 1) return out;
  out.reserve(static_cast<std::size_t>(m_count - 1));
  const double sd = std::sqrt(delta);
  LogState u = from;
  for (int m = 0; m < m_count - 1; ++m) {
    const double left = static_cast<double>(m_count - m);
    const double scale = std::sqrt((left - 1.0) / left) * sd;
    const double ex = rng.normal();
    const double ev = rng.normal();
    const Eigen::Matrix2d s = diffusion(u);
    LogState next;
    next.x = u.x + (to.x - u.x) / left + scale * (s(0, 0) * ex + s(0, 1) * ev);
    next.y = u.y + (to.y - u.y) / left + scale * (s(1, 0) * ex + s(1, 1) * ev);
    out.push_back(next);
    u = next;
  }
  return out;
}

std::vector<LogState> brownian_bridge_fill(const LogState& from, const LogState& to,
                                           int m_count, double delta, RngStream& rng);

/// Durham-Gallant modified bridge with the model's local diffusion matrix.
std::vector<LogState> modified_bridge_fill(const LogState& from, const LogState& to,
                                           int m_count, double delta,
                                           const ParamVector& theta, RngStream& rng);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

using PathPayoff = std::function<double(std::span<const LogState>)>;

/// Ensemble average of payoff over n_paths Euler paths of length horizon.
McEstimate conditional_expectation(const State& initial, const LogDynamics& dynamics,
                                   double horizon, const PathPayoff& payoff,
                                   std::size_t n_paths, double dt,
                                   const RngStream& rng);

/// Daily observations of (X, IV) simulated under P with `steps_per_day`
/// Euler steps per trading day. IV is the swap rate implied by V.
ObservedSeries simulate_series(const State& initial, const ParamVector& theta,
                               const ModelSpec& spec, std::size_t n_days,
                               const std::string& start_date, int steps_per_day,
                               const RngStream& rng);

}  // namespace nlsv
