#pragma once

// Limited-information expected maximum likelihood (EML).
//
// Each drift equation of the discretised (X, Y) system can be written as
//
//   g(U_{k+1}, U_k) = sum_l x_l f_l(U_k) delta + eps_{k+1},
//
// so for fixed (sigma, rho, b0_q, b1_q) the drift coefficients x solve the
// linear system Xi x = varpi, where Xi and varpi collect expectations of
// f_l f_j and g f_l under the bridge law between consecutive observations.
// The diffusion bridge is replaced by a Brownian bridge on Y. X enters g
// linearly and its bridge is independent of Y, so the X bridge is replaced
// by its conditional mean (the linear interpolant).

#include "nlsv/model.hpp"
#include "nlsv/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace nlsv {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BasisTable {
  std::size_t size = 0;
  /// f_l(u_k), l = 0..size-1
  std::function<void(const LogState&, std::span<double>)> basis;
  /// g(u_{k+1}, u_k) for a step of length delta
  std::function<double(const LogState& next, const LogState& curr, double delta)> offset;
};

/// Variance drift table. LN: only b1 is free (basis 1/sigma); the known
/// b0_q / (sigma V) term is moved into the offset. NL: four bases for b0..b3.
BasisTable variance_basis(const ParamVector& theta, const ModelSpec& spec);

/// Stock drift table for (a0, a1). The offset uses the variance innovation
/// eps^V, so theta must already carry the variance drift estimates.
BasisTable stock_basis(const ParamVector& theta, const ModelSpec& spec);

struct LinearSystem {
  Eigen::MatrixXd xi;
  Eigen::VectorXd varpi;
};

/// Observation pair with the id of the random stream its bridges draw from.
struct Interval {
  LogState from;
  LogState to;
  std::uint64_t stream_id = 0;
};

/// Intervals U_n -> U_{n+1} for n = 1..N-1, stream id n.
std::vector<Interval> eml_intervals(std::span<const LogState> observations);

struct EmlConfig {
  int m = 24;               ///< augmentation: M - 1 auxiliary points per interval
  int n_bridges = 576;      ///< bridge draws per interval expectation
  double delta = kDay;      ///< observation spacing, years
  std::uint64_t seed = 0;
  double max_condition = 1e12;
};

LinearSystem assemble_system(std::span<const Interval> intervals,
                             const BasisTable& table, const EmlConfig& config);

struct LinearSolution {
  Eigen::VectorXd x;
  double condition = 0.0;
};

/// Solves Xi x = varpi after symmetric diagonal equilibration. Throws
/// EstimationError if the equilibrated condition number exceeds the limit.
LinearSolution solve_system(const LinearSystem& system, double max_condition);

struct DriftEstimate {
  ParamVector theta;  ///< input theta with the estimated coefficients set
  LinearSystem system;
  double condition = 0.0;
};

DriftEstimate solve_variance_drift(std::span<const Interval> intervals,
                                   const ParamVector& theta, const ModelSpec& spec,
                                   const EmlConfig& config);

DriftEstimate solve_stock_drift(std::span<const Interval> intervals,
                                const ParamVector& theta_with_variance_drift,
                                const ModelSpec& spec, const EmlConfig& config);

/// Variance drift then stock drift, returning the full parameter vector.
ParamVector estimate_drifts(std::span<const Interval> intervals,
                            const ParamVector& theta, const ModelSpec& spec,
                            const EmlConfig& config);

}  // namespace nlsv
