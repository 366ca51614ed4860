#include "nlsv/model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace nlsv {

namespace {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

void require_state(const State& s) {
  require_finite(s.x, "log price");
  require_finite(s.v, "variance");
  if (s.v <= 0.0) {
    throw std::invalid_argument("variance must be positive");
  }
}

void require_drift_family(const ModelSpec& spec) {
  if (spec.family == Family::RW) {
    throw std::invalid_argument("random walk model has no drift");
  }
}

using Member = double ParamVector::*;

struct NamedMember {
  std::string_view name;
  Member member;
};

constexpr std::array<NamedMember, 12> kMembers{{
    {"sigma", &ParamVector::sigma},
    {"rho", &ParamVector::rho},
    {"b0_q", &ParamVector::b0_q},
    {"b1_q", &ParamVector::b1_q},
    {"a0", &ParamVector::a0},
    {"a1", &ParamVector::a1},
    {"b0", &ParamVector::b0},
    {"b1", &ParamVector::b1},
    {"b2", &ParamVector::b2},
    {"b3", &ParamVector::b3},
    {"r", &ParamVector::r},
    {"c", &ParamVector::c},
}};

Member find_member(std::string_view name) {
  for (const auto& m : kMembers) {
    if (m.name == name) return m.member;
  }
  throw std::invalid_argument("unknown parameter '" + std::string(name) + "'");
}

// Physical variance drift excess over the risk-neutral one.
double variance_excess(double v, const ParamVector& t, Family family) {
  if (family == Family::LN) return (t.b1 - t.b1_q) * v;
  return t.b0 - t.b0_q + (t.b1 - t.b1_q) * v + t.b2 * v * v + t.b3 / v;
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::RW: return "RW";
    case Family::LN: return "LN";
    case Family::NL: return "NL";
  }
  return "?";
}

Family family_from_string(std::string_view name) {
  if (name == "RW") return Family::RW;
  if (name == "LN") return Family::LN;
  if (name == "NL") return Family::NL;
  throw std::invalid_argument("unknown model family '" + std::string(name) + "'");
}

std::size_t ModelSpec::basis_count() const {
  switch (family) {
    case Family::RW: return 0;
    case Family::LN: return 2;
    case Family::NL: return 4;
  }
  return 0;
}

void ParamVector::validate() const {
  for (const auto& m : kMembers) {
    require_finite(this->*(m.member), m.name.data());
  }
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (std::abs(rho) >= 1.0) throw std::invalid_argument("|rho| must be < 1");
  if (b0_q <= 0.0) throw std::invalid_argument("b0_q must be positive");
  if (c <= 0.0) throw std::invalid_argument("dampening constant must be positive");
}

const std::vector<std::string>& parameter_names(const ModelSpec& spec) {
  static const std::vector<std::string> ln{"sigma", "rho", "b0_q", "b1_q",
                                           "a0",    "a1",  "b1"};
  static const std::vector<std::string> nl{"sigma", "rho", "b0_q", "b1_q", "a0",
                                           "a1",    "b0",  "b1",   "b2",   "b3"};
  static const std::vector<std::string> rw{};
  switch (spec.family) {
    case Family::LN: return ln;
    case Family::NL: return nl;
    case Family::RW: return rw;
  }
  return rw;
}

double get_parameter(const ParamVector& theta, std::string_view name) {
  return theta.*find_member(name);
}

void set_parameter(ParamVector& theta, std::string_view name, double value) {
  theta.*find_member(name) = value;
}

ParameterPartition partition(const ModelSpec& spec) {
  switch (spec.family) {
    case Family::LN:
      return {{"sigma", "rho", "b0_q"}, {"b1_q"}, {"a0", "a1"}, {"b1"}};
    case Family::NL:
      return {{"sigma", "rho"}, {"b0_q", "b1_q"}, {"a0", "a1"},
              {"b0", "b1", "b2", "b3"}};
    case Family::RW:
      break;
  }
  return {};
}

ParamVector reference_ln_parameters() {
  ParamVector t;
  t.sigma = 2.2047;
  t.rho = -0.6768;
  t.b0_q = 0.05817;
  t.b1_q = 10.9858;
  t.a0 = 0.0748;
  t.a1 = 3.3370;
  t.b0 = t.b0_q;
  t.b1 = -1.7645;
  return t;
}

ParamVector reference_nl_parameters() {
  ParamVector t;
  t.sigma = 2.1734;
  t.rho = -0.6803;
  t.b0_q = 0.0500;
  t.b1_q = 11.3260;
  t.a0 = 0.0284;
  t.a1 = 6.0870;
  t.b0 = -0.1064;
  t.b1 = 8.9591;
  t.b2 = -180.7473;
  t.b3 = 0.00068;
  return t;
}

Eigen::Vector2d drift_q(const State& s, const ParamVector& theta) {
  require_state(s);
  return {theta.r - 0.5 * s.v, theta.b0_q + theta.b1_q * s.v};
}

Eigen::Vector2d excess_drift(const State& s, const ParamVector& theta,
                             const ModelSpec& spec) {
  require_state(s);
  require_drift_family(spec);
  return {theta.a0 - theta.r + (theta.a1 + 0.5) * s.v,
          variance_excess(s.v, theta, spec.family)};
}

Eigen::Vector2d drift_p(const State& s, const ParamVector& theta,
                        const ModelSpec& spec, Dampening d) {
  require_state(s);
  require_drift_family(spec);
  if (d == Dampening::on) {
    return drift_q(s, theta) + dampening(s, theta, spec) * excess_drift(s, theta, spec);
  }
  const double v = s.v;
  const double var_drift =
      spec.family == Family::LN
          ? theta.b0_q + theta.b1 * v
          : theta.b0 + theta.b1 * v + theta.b2 * v * v + theta.b3 / v;
  return {theta.a0 + theta.a1 * v, var_drift};
}

Eigen::Matrix2d diffusion_matrix(const State& s, const ParamVector& theta) {
  require_state(s);
  const double sv = std::sqrt(s.v);
  Eigen::Matrix2d m;
  m << sv * std::sqrt(1.0 - theta.rho * theta.rho), sv * theta.rho,
      0.0, theta.sigma * s.v;
  return m;
}

double dampening(const State& s, const ParamVector& theta, const ModelSpec& spec) {
  const Eigen::Vector2d f = excess_drift(s, theta, spec);
  const double det = theta.sigma * std::pow(s.v, 1.5) *
                     std::sqrt(1.0 - theta.rho * theta.rho);
  return std::exp(-theta.c / std::abs(det) - theta.c * f.cwiseAbs().sum());
}

Eigen::Vector2d market_price_of_risk(const State& s, const ParamVector& theta,
                                     const ModelSpec& spec, Dampening d) {
  const Eigen::Vector2d f = excess_drift(s, theta, spec);
  // Sigma is upper triangular; back-substitute.
  const Eigen::Matrix2d sig = diffusion_matrix(s, theta);
  Eigen::Vector2d lambda;
  lambda(1) = f(1) / sig(1, 1);
  lambda(0) = (f(0) - sig(0, 1) * lambda(1)) / sig(0, 0);
  if (d == Dampening::on) lambda *= dampening(s, theta, spec);
  return lambda;
}

double gamma_transform(double v, double sigma) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument("gamma_transform requires v > 0");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std::log(v) / sigma;
}

double gamma_inverse(double y, double sigma) {
  if (!std::isfinite(y)) throw std::invalid_argument("non-finite y");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std::exp(sigma * y);
}

SwapCoefficients swap_coefficients(const ParamVector& theta, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("swap horizon must be positive");
  const double z = theta.b1_q * delta;
  SwapCoefficients out;
  if (std::abs(z) > 1e-6) {
    out.b = std::expm1(z) / z;
    out.a = -(theta.b0_q / theta.b1_q) * (1.0 - out.b);
  } else {
    // (e^z - 1)/z = 1 + z/2 + z^2/6 + z^3/24; A = b0_q * delta * (B - 1) / z.
    out.b = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    out.a = theta.b0_q * delta * (0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0);
  }
  return out;
}

double iv_to_v(double iv, const SwapCoefficients& coeffs) {
  const double v = (iv - coeffs.a) / coeffs.b;
  if (!(v > 0.0)) {
    throw DomainViolation("implied variance " + std::to_string(iv) +
                          " maps to non-positive instantaneous variance");
  }
  return v;
}

double v_to_iv(double v, const SwapCoefficients& coeffs) {
  return coeffs.a + coeffs.b * v;
}

double iv_to_v(double iv, const ParamVector& theta, double delta) {
  return iv_to_v(iv, swap_coefficients(theta, delta));
}

double v_to_iv(double v, const ParamVector& theta, double delta) {
  return v_to_iv(v, swap_coefficients(theta, delta));
}

LogDynamics::LogDynamics(const ParamVector& theta, const ModelSpec& spec,
                         Measure measure, Dampening d)
    : theta_(theta),
      spec_(spec),
      measure_(measure),
      dampening_(d),
      sqrt_one_minus_rho2_(std::sqrt(1.0 - theta.rho * theta.rho)) {
  if (measure == Measure::physical) require_drift_family(spec);
}

double LogDynamics::variance_drift(double y) const {
  const double v = std::exp(theta_.sigma * y);
  double mu = 0.0;
  if (measure_ == Measure::risk_neutral) {
    mu = theta_.b0_q + theta_.b1_q * v;
  } else if (dampening_ == Dampening::on) {
    mu = drift_p({0.0, v}, theta_, spec_, Dampening::on)(1);
  } else if (spec_.family == Family::LN) {
    mu = theta_.b0_q + theta_.b1 * v;
  } else {
    mu = theta_.b0 + theta_.b1 * v + theta_.b2 * v * v + theta_.b3 / v;
  }
  return mu / (theta_.sigma * v) - 0.5 * theta_.sigma;
}

Eigen::Vector2d LogDynamics::drift(const LogState& u) const {
  const double v = std::exp(theta_.sigma * u.y);
  double mu_x = 0.0;
  if (measure_ == Measure::risk_neutral) {
    mu_x = theta_.r - 0.5 * v;
  } else if (dampening_ == Dampening::on) {
    mu_x = drift_p({u.x, v}, theta_, spec_, Dampening::on)(0);
  } else {
    mu_x = theta_.a0 + theta_.a1 * v;
  }
  return {mu_x, variance_drift(u.y)};
}

Eigen::Matrix2d LogDynamics::diffusion(const LogState& u) const {
  const double sv = std::exp(0.5 * theta_.sigma * u.y);
  Eigen::Matrix2d m;
  m << sqrt_one_minus_rho2_ * sv, theta_.rho * sv, 0.0, 1.0;
  return m;
}

}  // namespace nlsv
