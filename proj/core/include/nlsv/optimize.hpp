#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>

namespace nlsv {

struct MinimizeOptions {
  std::size_t max_iterations = 400;
  /// Stop when the simplex characteristic size falls below this.
  double size_tolerance = 1e-4;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string message;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Derivative-free simplex minimisation (GSL nmsimplex2). Non-finite
/// objective values are treated as a large penalty.
MinimizeResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start,
                           const Eigen::VectorXd& step, const MinimizeOptions& options);

}  // namespace nlsv
