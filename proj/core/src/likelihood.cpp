#include "nlsv/likelihood.hpp"

#include "nlsv/optimize.hpp"
#include "nlsv/simulation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nlsv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kJitterStream = 0xF17ull << 40;

// Coordinates used by the optimiser and the numerical derivatives.
double to_search(std::string_view name, double value) {
  if (name == "sigma" || name == "b0_q") return std::log(value);
  if (name == "rho") return std::atanh(value);
  return value;
}

double from_search(std::string_view name, double value) {
  if (name == "sigma" || name == "b0_q") return std::exp(value);
  if (name == "rho") return std::tanh(value);
  return value;
}

// d(natural)/d(search)
double search_jacobian(std::string_view name, double natural) {
  if (name == "sigma" || name == "b0_q") return natural;
  if (name == "rho") return 1.0 - natural * natural;
  return 1.0;
}

const std::vector<std::string> kOuterNames{"sigma", "rho", "b0_q", "b1_q"};

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void LikelihoodConfig::validate() const {
  if (m < 1) throw std::invalid_argument("M must be >= 1");
  if (s < 1) throw std::invalid_argument("S must be >= 1");
  if (n_bridges < 1) throw std::invalid_argument("n_bridges must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (!(fd_step > 0.0) || !(hessian_step > 0.0)) {
    throw std::invalid_argument("finite-difference steps must be positive");
  }
}

EmlConfig LikelihoodConfig::eml() const {
  EmlConfig e;
  e.m = m;
  e.n_bridges = n_bridges;
  e.delta = delta;
  e.seed = seed;
  return e;
}

double euler_density(const LogState& next, const LogState& curr,
                     const ParamVector& theta, const ModelSpec& spec, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return euler_log_density_of(next, curr, LogDynamics(theta, spec), delta);
}

double proposal_density_q(const LogState& next, const LogState& curr,
                          const LogState& end, const ParamVector& theta, int m,
                          int m_count, double delta) {
  if (m < 0 || m >= m_count - 1) {
    throw std::invalid_argument("proposal density requires 0 <= m < M - 1");
  }
  const LogDynamics dyn(theta, ModelSpec::ln(), Measure::risk_neutral);
  return proposal_log_density_of(next, curr, end, m, m_count, delta,
                                 [&](const LogState& u) { return dyn.diffusion(u); });
}

SmlEstimate sml_transition_logdensity(const LogState& from, const LogState& to,
                                      const ParamVector& theta, const ModelSpec& spec,
                                      const LikelihoodConfig& config, RngStream& rng) {
  config.validate();
  return sml_log_density_of(LogDynamics(theta, spec), from, to, config.delta, config.m,
                            config.s, rng);
}

std::vector<LogState> observed_log_states(const ObservedSeries& series,
                                          const ParamVector& theta) {
  const SwapCoefficients coeffs = swap_coefficients(theta, kSwapHorizon);
  std::vector<LogState> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    out[i] = {series.x[i], std::log(iv_to_v(series.iv[i], coeffs)) / theta.sigma};
  }
  return out;
}

LoglikResult total_loglik(const ObservedSeries& series, const ParamVector& theta,
                          const ModelSpec& spec, const LikelihoodConfig& config) {
  config.validate();
  LoglikResult out;
  const std::size_t n = series.size() < 2 ? 0 : series.size() - 1;
  out.contributions.assign(n, 0.0);

  const SwapCoefficients coeffs = swap_coefficients(theta, kSwapHorizon);
  std::vector<LogState> u(series.size());
  std::vector<bool> bad(series.size(), false);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double v = (series.iv[i] - coeffs.a) / coeffs.b;
    bad[i] = !(v > 0.0);
    u[i] = {series.x[i], bad[i] ? 0.0 : std::log(v) / theta.sigma};
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (bad[i] || bad[i - 1]) ++out.failed_intervals;
  }
  if (out.failed_intervals > 0) {
    out.value = kNegInf;
    std::fill(out.contributions.begin(), out.contributions.end(), kNegInf);
    return out;
  }

  const LogDynamics dyn(theta, spec);
  const double constant = std::log(coeffs.b) + std::log(theta.sigma);
  detail::parallel_for(n, config.workers, [&](std::size_t k) {
    // Substream 1 keeps these draws apart from the EML bridges of interval k.
    RngStream rng(config.seed, k, 1);
    const SmlEstimate est =
        sml_log_density_of(dyn, u[k], u[k + 1], config.delta, config.m, config.s, rng);
    out.contributions[k] = est.log_density - theta.sigma * u[k + 1].y - constant;
  });

  double sum = 0.0;
  for (double c : out.contributions) {
    if (!std::isfinite(c)) ++out.failed_intervals;
    sum += c;
  }
  out.value = out.failed_intervals > 0 ? kNegInf : sum;
  return out;
}

ParamVector profile_drifts(const ObservedSeries& series, const ParamVector& theta,
                           const ModelSpec& spec, const LikelihoodConfig& config) {
  const std::vector<LogState> u = observed_log_states(series, theta);
  const std::vector<Interval> intervals = eml_intervals(u);
  return estimate_drifts(intervals, theta, spec, config.eml());
}

ParamVector moment_initial_guess(const ObservedSeries& series, double rate) {
  const std::size_t n = series.size();
  if (n < 3) throw std::invalid_argument("series too short for an initial guess");
  std::vector<double> dx(n - 1), dl(n - 1), r2(n - 1), ivlag(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    dx[i - 1] = series.x[i] - series.x[i - 1];
    dl[i - 1] = std::log(series.iv[i]) - std::log(series.iv[i - 1]);
    r2[i - 1] = dx[i - 1] * dx[i - 1] * kTradingDaysPerYear;
    ivlag[i - 1] = series.iv[i - 1];
  }
  const double mdx = mean_of(dx), mdl = mean_of(dl);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    sxx += (dx[i] - mdx) * (dx[i] - mdx);
    syy += (dl[i] - mdl) * (dl[i] - mdl);
    sxy += (dx[i] - mdx) * (dl[i] - mdl);
  }
  ParamVector t;
  t.r = rate;
  t.sigma = std::max(0.05, std::sqrt(syy / static_cast<double>(dl.size() - 1) * kTradingDaysPerYear));
  t.rho = (sxx > 0 && syy > 0) ? std::clamp(sxy / std::sqrt(sxx * syy), -0.95, 0.95) : 0.0;

  // V ~ 262 dx^2 on average and V = (IV - A)/B.
  const double miv = mean_of(ivlag), mr2 = mean_of(r2);
  double cov = 0.0, var = 0.0;
  for (std::size_t i = 0; i < r2.size(); ++i) {
    cov += (ivlag[i] - miv) * (r2[i] - mr2);
    var += (ivlag[i] - miv) * (ivlag[i] - miv);
  }
  const double slope = var > 0 ? cov / var : 0.0;
  t.b1_q = 0.0;
  t.b0_q = 0.05;
  if (slope > 0.0) {
    const double b_target = 1.0 / slope;
    const double a_target = miv - b_target * mr2;
    // B(b1_q) is increasing in b1_q; bisect on a bracket.
    auto b_of = [](double k) {
      ParamVector p;
      p.b0_q = 1.0;
      p.b1_q = k;
      return swap_coefficients(p, kSwapHorizon).b;
    };
    double lo = -200.0, hi = 60.0;
    if (b_target > b_of(lo) && b_target < b_of(hi)) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (b_of(mid) < b_target ? lo : hi) = mid;
      }
      const double k = 0.5 * (lo + hi);
      ParamVector unit;
      unit.b0_q = 1.0;
      unit.b1_q = k;
      const double a_unit = swap_coefficients(unit, kSwapHorizon).a;  // A per unit b0_q
      if (a_unit > 0.0 && a_target > 0.0) {
        t.b1_q = k;
        t.b0_q = a_target / a_unit;
      }
    }
  }
  // Keep every observation inside the domain of the IV -> V map.
  const double min_iv = *std::min_element(series.iv.begin(), series.iv.end());
  for (int it = 0; it < 60 && swap_coefficients(t, kSwapHorizon).a >= 0.9 * min_iv; ++it) {
    t.b0_q *= 0.5;
  }
  t.b0 = t.b0_q;
  t.b1 = t.b1_q;
  return t;
}

SandwichResult sandwich_errors(const ObservedSeries& series, const ParamVector& theta,
                               const ModelSpec& spec, const LikelihoodConfig& config) {
  config.validate();
  const auto& names = parameter_names(spec);
  const auto d = static_cast<Eigen::Index>(names.size());
  Eigen::VectorXd phi(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    phi(j) = to_search(names[j], get_parameter(theta, names[j]));
  }
  auto at = [&](const Eigen::VectorXd& p) {
    ParamVector t = theta;
    for (Eigen::Index j = 0; j < d; ++j) set_parameter(t, names[j], from_search(names[j], p(j)));
    if (spec.family == Family::LN) t.b0 = t.b0_q;
    LoglikResult r = total_loglik(series, t, spec, config);
    if (r.failed_intervals > 0) {
      throw EstimationError("likelihood undefined near theta; cannot differentiate");
    }
    return r;
  };

  const LoglikResult base = at(phi);
  const auto n = base.contributions.size();

  // Outer product of per-observation central-difference scores.
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(n), d);
  const double h = config.fd_step;
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXd up = phi, down = phi;
    up(j) += h;
    down(j) -= h;
    const LoglikResult lu = at(up);
    const LoglikResult ld = at(down);
    for (std::size_t i = 0; i < n; ++i) {
      scores(static_cast<Eigen::Index>(i), j) =
          (lu.contributions[i] - ld.contributions[i]) / (2.0 * h);
    }
  }
  const Eigen::MatrixXd opg = scores.transpose() * scores;

  // Hessian of the total by second differences. A fixed step is useless for
  // coordinates whose standard error is large (b2 in the hundreds): the
  // change in the total drops below round-off. Steps are taken as a fraction
  // of the standard deviation implied by the OPG diagonal instead.
  Eigen::VectorXd k(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double info = opg(j, j);
    k(j) = info > 0.0 && std::isfinite(info) ? config.hessian_step / std::sqrt(info) : 1e-4;
  }
  Eigen::MatrixXd hess(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd up = phi, down = phi;
    up(i) += k(i);
    down(i) -= k(i);
    hess(i, i) = (at(up).value - 2.0 * base.value + at(down).value) / (k(i) * k(i));
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Eigen::VectorXd pp = phi, pm = phi, mp = phi, mm = phi;
      pp(i) += k(i); pp(j) += k(j);
      pm(i) += k(i); pm(j) -= k(j);
      mp(i) -= k(i); mp(j) += k(j);
      mm(i) -= k(i); mm(j) -= k(j);
      hess(i, j) = (at(pp).value - at(pm).value - at(mp).value + at(mm).value) / (4.0 * k(i) * k(j));
      hess(j, i) = hess(i, j);
    }
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(hess);
  if (!lu.isInvertible() || !hess.allFinite()) {
    throw EstimationError("Hessian of the log-likelihood is singular");
  }
  const Eigen::MatrixXd hinv = lu.inverse();
  Eigen::MatrixXd cov_phi = hinv * opg * hinv.transpose();
  cov_phi = 0.5 * (cov_phi + cov_phi.transpose());

  Eigen::VectorXd jac(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    jac(j) = search_jacobian(names[j], get_parameter(theta, names[j]));
  }
  SandwichResult out;
  out.names = names;
  out.covariance = jac.asDiagonal() * cov_phi * jac.asDiagonal();
  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.hessian = hess;
  out.opg = opg;
  return out;
}

double FitResult::std_error(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name && covariance_ok) return std_errors(static_cast<Eigen::Index>(j));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

FitResult fit(const ObservedSeries& series, const ModelSpec& spec,
              const LikelihoodConfig& config, const std::optional<ParamVector>& init) {
  config.validate();
  series.validate();
  if (spec.family == Family::RW) throw std::invalid_argument("random walk model has no parameters");
  if (series.size() < config.min_observations) {
    throw std::invalid_argument("series has " + std::to_string(series.size()) +
                                " observations, fewer than the minimum " +
                                std::to_string(config.min_observations));
  }
  const ParamVector start = init ? *init : moment_initial_guess(series);

  auto theta_at = [&](const Eigen::VectorXd& phi) {
    ParamVector t = start;
    for (std::size_t j = 0; j < kOuterNames.size(); ++j) {
      set_parameter(t, kOuterNames[j], from_search(kOuterNames[j], phi(static_cast<Eigen::Index>(j))));
    }
    return t;
  };
  auto objective = [&](const Eigen::VectorXd& phi) {
    try {
      const ParamVector t = theta_at(phi);
      if (!(std::abs(t.rho) < 1.0) || !(t.sigma > 0.0) || !(t.b0_q > 0.0)) {
        return std::numeric_limits<double>::infinity();
      }
      const ParamVector full = profile_drifts(series, t, spec, config);
      return -total_loglik(series, full, spec, config).value;
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Eigen::VectorXd phi0(4);
  for (std::size_t j = 0; j < kOuterNames.size(); ++j) {
    phi0(static_cast<Eigen::Index>(j)) = to_search(kOuterNames[j], get_parameter(start, kOuterNames[j]));
  }
  Eigen::VectorXd step(4);
  step << 0.1, 0.1, 0.2, 1.0;
  MinimizeOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.size_tolerance = config.size_tolerance;

  FitDiagnostics diag;
  MinimizeResult best;
  best.value = std::numeric_limits<double>::infinity();
  RngStream jitter(config.seed, kJitterStream);
  for (int r = 0; r < config.restarts; ++r) {
    Eigen::VectorXd x0 = phi0;
    if (r > 0) {
      for (Eigen::Index j = 0; j < x0.size(); ++j) x0(j) += step(j) * jitter.normal();
    }
    MinimizeResult res = nelder_mead(objective, x0, step, opts);
    diag.iterations += res.iterations;
    diag.evaluations += res.evaluations;
    ++diag.starts;
    if (res.value < best.value) best = std::move(res);
  }
  // Polish from the best point with a smaller simplex.
  {
    MinimizeResult res = nelder_mead(objective, best.x, 0.25 * step, opts);
    diag.iterations += res.iterations;
    diag.evaluations += res.evaluations;
    if (res.value <= best.value) best = std::move(res);
  }
  diag.converged = best.converged && std::isfinite(best.value) && best.value < 1e99;
  diag.message = best.message;

  FitResult out;
  out.spec = spec;
  out.config = config;
  out.n_observations = series.size();
  out.names = parameter_names(spec);
  out.diagnostics = diag;
  if (!(best.value < 1e99)) {
    out.theta = start;
    out.loglik = kNegInf;
    out.diagnostics.message = "no feasible parameter point found";
    out.covariance_message = "not computed";
    return out;
  }
  out.theta = profile_drifts(series, theta_at(best.x), spec, config);
  out.loglik = -best.value;
  try {
    const SandwichResult sw = sandwich_errors(series, out.theta, spec, config);
    out.covariance = sw.covariance;
    out.std_errors = sw.std_errors;
    out.covariance_ok = true;
  } catch (const std::exception& e) {
    out.covariance_message = e.what();
  }
  return out;
}

}  // namespace nlsv
