#include "nlsv/eml.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlsv {

BasisTable variance_basis(const ParamVector& theta, const ModelSpec& spec) {
  const double sigma = theta.sigma;
  BasisTable t;
  switch (spec.family) {
    case Family::LN: {
      const double b0_q = theta.b0_q;
      t.size = 1;
      t.basis = [sigma](const LogState&, std::span<double> f) { f[0] = 1.0 / sigma; };
      t.offset = [sigma, b0_q](const LogState& next, const LogState& curr, double delta) {
        const double v = std::exp(sigma * curr.y);
        return next.y - curr.y + 0.5 * sigma * delta - b0_q * delta / (sigma * v);
      };
      break;
    }
    case Family::NL:
      t.size = 4;
      t.basis = [sigma](const LogState& u, std::span<double> f) {
        const double v = std::exp(sigma * u.y);
        f[0] = 1.0 / (sigma * v);
        f[1] = 1.0 / sigma;
        f[2] = v / sigma;
        f[3] = 1.0 / (sigma * v * v);
      };
      t.offset = [sigma](const LogState& next, const LogState& curr, double delta) {
        return next.y - curr.y + 0.5 * sigma * delta;
      };
      break;
    case Family::RW:
      throw std::invalid_argument("random walk model has no variance drift");
  }
  return t;
}

BasisTable stock_basis(const ParamVector& theta, const ModelSpec& spec) {
  const LogDynamics dyn(theta, spec, LogDynamics::Measure::physical);
  const double sigma = theta.sigma;
  const double rho = theta.rho;
  const double s = std::sqrt(1.0 - rho * rho);
  BasisTable t;
  t.size = 2;
  t.basis = [sigma, s](const LogState& u, std::span<double> f) {
    const double sv = std::exp(0.5 * sigma * u.y);
    f[0] = 1.0 / (s * sv);
    f[1] = sv / s;
  };
  t.offset = [dyn, sigma, rho, s](const LogState& next, const LogState& curr,
                                  double delta) {
    const double sv = std::exp(0.5 * sigma * curr.y);
    const double eps_v = next.y - curr.y - dyn.variance_drift(curr.y) * delta;
    return (next.x - curr.x - rho * sv * eps_v) / (s * sv);
  };
  return t;
}

std::vector<Interval> eml_intervals(std::span<const LogState> observations) {
  std::vector<Interval> out;
  for (std::size_t n = 1; n + 1 < observations.size(); ++n) {
    out.push_back({observations[n], observations[n + 1], n});
  }
  return out;
}

LinearSystem assemble_system(std::span<const Interval> intervals,
                             const BasisTable& table, const EmlConfig& config) {
  if (config.m < 1) throw std::invalid_argument("M must be >= 1");
  if (config.n_bridges < 1) throw std::invalid_argument("n_bridges must be >= 1");
  const auto dim = static_cast<Eigen::Index>(table.size);
  const int m_count = config.m;
  const double delta = config.delta / m_count;
  const double sd = std::sqrt(delta);
  const int n_bridges = m_count == 1 ? 1 : config.n_bridges;
  const double weight = 1.0 / n_bridges;

  LinearSystem sys{Eigen::MatrixXd::Zero(dim, dim), Eigen::VectorXd::Zero(dim)};
  Eigen::MatrixXd xi_local(dim, dim);
  Eigen::VectorXd varpi_local(dim);
  std::vector<double> f(table.size);
  std::vector<LogState> u(static_cast<std::size_t>(m_count) + 1);

  for (const Interval& iv : intervals) {
    xi_local.setZero();
    varpi_local.setZero();
    RngStream rng(config.seed, iv.stream_id);
    for (int b = 0; b < n_bridges; ++b) {
      u.front() = iv.from;
      u.back() = iv.to;
      for (int m = 0; m + 1 < m_count; ++m) {
        const double left = static_cast<double>(m_count - m);
        rng.normal();  // X component of the shared draw, unused here
        const double ev = rng.normal();
        u[m + 1].x = iv.from.x + (iv.to.x - iv.from.x) * (m + 1) / m_count;
        u[m + 1].y = u[m].y + (iv.to.y - u[m].y) / left +
                     std::sqrt((left - 1.0) / left) * sd * ev;
      }
      for (int m = 0; m < m_count; ++m) {
        table.basis(u[m], f);
        const double g = table.offset(u[m + 1], u[m], delta);
        for (Eigen::Index l = 0; l < dim; ++l) {
          varpi_local(l) += g * f[l];
          for (Eigen::Index k = l; k < dim; ++k) xi_local(l, k) += f[l] * f[k];
        }
      }
    }
    for (Eigen::Index l = 0; l < dim; ++l) {
      if (!std::isfinite(varpi_local(l)) || !std::isfinite(xi_local(l, l))) {
        std::ostringstream msg;
        msg << "non-finite EML basis evaluation on interval " << iv.stream_id
            << " (y from " << iv.from.y << " to " << iv.to.y << ")";
        throw EstimationError(msg.str());
      }
    }
    sys.xi.triangularView<Eigen::Upper>() += delta * weight * xi_local;
    sys.varpi += weight * varpi_local;
  }
  sys.xi.triangularView<Eigen::StrictlyLower>() = sys.xi.transpose();
  return sys;
}

LinearSolution solve_system(const LinearSystem& system, double max_condition) {
  const Eigen::Index n = system.xi.rows();
  if (n == 0) throw EstimationError("empty EML system");
  const Eigen::VectorXd d = system.xi.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw EstimationError("EML system has a zero basis column");
  }
  const Eigen::VectorXd scale = d.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd a = scale.asDiagonal() * system.xi * scale.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1)
                                      : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << "ill-conditioned EML system (condition " << cond << ")";
    throw EstimationError(msg.str());
  }
  const Eigen::VectorXd z = svd.solve(scale.asDiagonal() * system.varpi);
  return {scale.asDiagonal() * z, cond};
}

DriftEstimate solve_variance_drift(std::span<const Interval> intervals,
                                   const ParamVector& theta, const ModelSpec& spec,
                                   const EmlConfig& config) {
  const BasisTable table = variance_basis(theta, spec);
  DriftEstimate out{theta, assemble_system(intervals, table, config), 0.0};
  const LinearSolution sol = solve_system(out.system, config.max_condition);
  out.condition = sol.condition;
  if (spec.family == Family::LN) {
    out.theta.b1 = sol.x(0);
    out.theta.b0 = theta.b0_q;
  } else {
    out.theta.b0 = sol.x(0);
    out.theta.b1 = sol.x(1);
    out.theta.b2 = sol.x(2);
    out.theta.b3 = sol.x(3);
  }
  return out;
}

DriftEstimate solve_stock_drift(std::span<const Interval> intervals,
                                const ParamVector& theta_with_variance_drift,
                                const ModelSpec& spec, const EmlConfig& config) {
  const BasisTable table = stock_basis(theta_with_variance_drift, spec);
  DriftEstimate out{theta_with_variance_drift, assemble_system(intervals, table, config),
                    0.0};
  const LinearSolution sol = solve_system(out.system, config.max_condition);
  out.condition = sol.condition;
  out.theta.a0 = sol.x(0);
  out.theta.a1 = sol.x(1);
  return out;
}

ParamVector estimate_drifts(std::span<const Interval> intervals,
                            const ParamVector& theta, const ModelSpec& spec,
                            const EmlConfig& config) {
  const DriftEstimate var = solve_variance_drift(intervals, theta, spec, config);
  return solve_stock_drift(intervals, var.theta, spec, config).theta;
}

}  // namespace nlsv
