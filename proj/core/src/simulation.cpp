#include "nlsv/simulation.hpp"

#include <stdexcept>

namespace nlsv {

LogState euler_step(const LogState& u, const LogDynamics& dynamics, double dt,
                    const Eigen::Vector2d& eps) {
  const Eigen::Vector2d mu = dynamics.drift(u);
  const Eigen::Matrix2d s = dynamics.diffusion(u);
  return {u.x + mu(0) * dt + s(0, 0) * eps(0) + s(0, 1) * eps(1),
          u.y + mu(1) * dt + eps(1)};
}

LogState euler_step(const LogState& u, const ParamVector& theta,
                    const ModelSpec& spec, Measure measure, double dt,
                    const Eigen::Vector2d& eps) {
  if (!(dt >= 0.0)) throw std::invalid_argument("time step must be non-negative");
  return euler_step(u, LogDynamics(theta, spec, measure), dt, eps);
}

PathEnsemble simulate_paths(const LogState& initial, const LogDynamics& dynamics,
                            double dt, std::size_t n_steps, std::size_t n_paths,
                            const RngStream& rng) {
  if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  PathEnsemble out;
  out.n_paths = n_paths;
  out.n_steps = n_steps;
  out.dt = dt;
  out.states.resize(n_paths * (n_steps + 1));
  const double sd = std::sqrt(dt);
  for (std::size_t p = 0; p < n_paths; ++p) {
    RngStream stream = rng.substream(static_cast<std::uint32_t>(p));
    LogState* row = out.states.data() + p * (n_steps + 1);
    row[0] = initial;
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double ex = stream.normal() * sd;
      const double ev = stream.normal() * sd;
      row[k + 1] = euler_step(row[k], dynamics, dt, {ex, ev});
    }
  }
  return out;
}

PathEnsemble simulate_paths(const LogState& initial, const ParamVector& theta,
                            const ModelSpec& spec, Measure measure, double dt,
                            std::size_t n_steps, std::size_t n_paths,
                            const RngStream& rng) {
  return simulate_paths(initial, LogDynamics(theta, spec, measure), dt, n_steps,
                        n_paths, rng);
}

std::vector<LogState> LatticePath::flatten() const {
  std::vector<LogState> out;
  if (observations.empty()) return out;
  out.reserve(augmented_size());
  for (std::size_t i = 0; i + 1 < observations.size(); ++i) {
    out.push_back(observations[i]);
    if (i < auxiliary.size()) {
      out.insert(out.end(), auxiliary[i].begin(), auxiliary[i].end());
    }
  }
  out.push_back(observations.back());
  return out;
}

std::vector<LogState> brownian_bridge_fill(const LogState& from, const LogState& to,
                                           int m_count, double delta, RngStream& rng) {
  if (m_count < 1) throw std::invalid_argument("M must be >= 1");
  const Eigen::Matrix2d identity = Eigen::Matrix2d::Identity();
  return bridge_fill(from, to, m_count, delta,
                     [&](const LogState&) { return identity; }, rng);
}

std::vector<LogState> modified_bridge_fill(const LogState& from, const LogState& to,
                                           int m_count, double delta,
                                           const ParamVector& theta, RngStream& rng) {
  if (m_count < 1) throw std::invalid_argument("M must be >= 1");
  // Only the diffusion is used, which does not depend on the drift family.
  const LogDynamics dyn(theta, ModelSpec::ln(), Measure::risk_neutral);
  return bridge_fill(from, to, m_count, delta,
                     [&](const LogState& u) { return dyn.diffusion(u); }, rng);
}

McEstimate conditional_expectation(const State& initial, const LogDynamics& dynamics,
                                   double horizon, const PathPayoff& payoff,
                                   std::size_t n_paths, double dt,
                                   const RngStream& rng) {
  if (horizon < 0.0) throw std::invalid_argument("horizon must be non-negative");
  if (n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
  const LogState start{initial.x, gamma_transform(initial.v, dynamics.params().sigma)};
  const auto n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (n_steps == 0) {
    const LogState only[1] = {start};
    return {payoff(only), 0.0, n_paths};
  }
  const double sd = std::sqrt(dt);
  std::vector<LogState> path(n_steps + 1);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    RngStream stream = rng.substream(static_cast<std::uint32_t>(p));
    path[0] = start;
    for (std::size_t k = 0; k < n_steps; ++k) {
      const double ex = stream.normal() * sd;
      const double ev = stream.normal() * sd;
      path[k + 1] = euler_step(path[k], dynamics, dt, {ex, ev});
    }
    const double value = payoff(path);
    sum += value;
    sum_sq += value * value;
  }
  const double n = static_cast<double>(n_paths);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n), n_paths};
}

ObservedSeries simulate_series(const State& initial, const ParamVector& theta,
                               const ModelSpec& spec, std::size_t n_days,
                               const std::string& start_date, int steps_per_day,
                               const RngStream& rng) {
  if (steps_per_day < 1) throw std::invalid_argument("steps_per_day must be >= 1");
  if (!(initial.v > 0.0)) throw std::invalid_argument("initial variance must be positive");
  ObservedSeries out;
  out.dates = business_dates(start_date, n_days);
  out.x.reserve(n_days);
  out.iv.reserve(n_days);
  const SwapCoefficients coeffs = swap_coefficients(theta, kSwapHorizon);
  const LogDynamics dyn(theta, spec, Measure::physical);
  const double dt = kDay / steps_per_day;
  const double sd = std::sqrt(dt);
  RngStream stream = rng;
  LogState u{initial.x, gamma_transform(initial.v, theta.sigma)};
  for (std::size_t i = 0; i < n_days; ++i) {
    if (i > 0) {
      for (int k = 0; k < steps_per_day; ++k) {
        const double ex = stream.normal() * sd;
        const double ev = stream.normal() * sd;
        u = euler_step(u, dyn, dt, {ex, ev});
      }
    }
    out.x.push_back(u.x);
    out.iv.push_back(v_to_iv(gamma_inverse(u.y, theta.sigma), coeffs));
  }
  return out;
}

}  // namespace nlsv
