#include "nlsv/model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nlsv;

namespace {

ParamVector random_theta(std::mt19937_64& gen, Family family) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParamVector t = family == Family::NL ? reference_nl_parameters() : reference_ln_parameters();
  t.sigma *= 1.0 + 0.5 * u(gen);
  t.rho = 0.9 * u(gen);
  t.b0_q *= 1.0 + 0.5 * u(gen);
  t.b1_q += 5.0 * u(gen);
  t.a0 += 0.1 * u(gen);
  t.a1 += 2.0 * u(gen);
  t.b1 += 2.0 * u(gen);
  if (family == Family::NL) {
    t.b0 += 0.05 * u(gen);
    t.b2 += 20.0 * u(gen);
    t.b3 *= 1.0 + 0.5 * u(gen);
  }
  return t;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("physical drift is the risk-neutral drift plus the excess drift") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> vdist(1e-3, 0.5);
  for (Family fam : {Family::LN, Family::NL}) {
    for (int i = 0; i < 10000; ++i) {
      const ParamVector t = random_theta(gen, fam);
      const State s{4.0, vdist(gen)};
      const Eigen::Vector2d lhs = drift_q(s, t) + excess_drift(s, t, ModelSpec{fam});
      const Eigen::Vector2d rhs = drift_p(s, t, ModelSpec{fam});
      const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
      REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 8 * 2.3e-16 * scale);
    }
  }
}

TEST_CASE("NL drift nests LN drift") {
  ParamVector t = reference_ln_parameters();
  t.b0 = t.b0_q;
  t.b2 = 0.0;
  t.b3 = 0.0;
  for (double v : {0.001, 0.02, 0.3}) {
    const State s{0.0, v};
    CHECK(drift_p(s, t, ModelSpec::nl())(1) == doctest::Approx(drift_p(s, t, ModelSpec::ln())(1)).epsilon(1e-15));
    CHECK(drift_p(s, t, ModelSpec::nl())(0) == drift_p(s, t, ModelSpec::ln())(0));
  }
}

TEST_CASE("dampening stays in (0, 1], decreases in c and tends to one") {
  for (Family fam : {Family::LN, Family::NL}) {
    ParamVector t = fam == Family::NL ? reference_nl_parameters() : reference_ln_parameters();
    for (double v = 0.01; v <= 0.1 + 1e-12; v += 0.001) {
      const State s{0.0, v};
      double prev = 0.0;
      for (double c : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8}) {
        t.c = c;
        const double d = dampening(s, t, ModelSpec{fam});
        CHECK(d > 0.0);
        CHECK(d <= 1.0);
        CHECK(d >= prev);
        prev = d;
      }
      t.c = kDefaultDampening;
      CHECK(dampening(s, t, ModelSpec{fam}) > 0.9);
      CHECK(dampening(s, t, ModelSpec{fam}) < 1.0);
      t.c = 1e-12;
      CHECK(dampening(s, t, ModelSpec{fam}) == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("dampening near zero variance kills the risk premium") {
  ParamVector t = reference_nl_parameters();
  t.c = 1e-3;
  const State s{0.0, 1e-5};
  CHECK(dampening(s, t, ModelSpec::nl()) < 1e-100);
  const auto lambda = market_price_of_risk(s, t, ModelSpec::nl(), Dampening::on);
  CHECK(std::isfinite(lambda(0)));
  CHECK(std::abs(lambda(1)) < 1e-90);
}

TEST_CASE("market price of risk solves Sigma lambda = D f") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> vdist(1e-3, 0.5);
  for (Family fam : {Family::LN, Family::NL}) {
    for (int i = 0; i < 1000; ++i) {
      const ParamVector t = random_theta(gen, fam);
      const State s{0.0, vdist(gen)};
      for (Dampening d : {Dampening::off, Dampening::on}) {
        const Eigen::Vector2d lambda = market_price_of_risk(s, t, ModelSpec{fam}, d);
        const double damp = d == Dampening::on ? dampening(s, t, ModelSpec{fam}) : 1.0;
        const Eigen::Vector2d f = damp * excess_drift(s, t, ModelSpec{fam});
        const Eigen::Vector2d residual = diffusion_matrix(s, t) * lambda - f;
        REQUIRE(residual.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + f.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("LN variance premium is constant in V") {
  const ParamVector t = reference_ln_parameters();
  double lo = 1e300, hi = -1e300;
  for (double v = 0.001; v < 0.5; v += 0.001) {
    const double l = market_price_of_risk({0.0, v}, t, ModelSpec::ln())(1);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  CHECK(hi - lo < 1e-12);
  CHECK(lo == doctest::Approx(-5.7833).epsilon(1e-4));
  // (b1 - b1_q) / sigma
  CHECK(lo == doctest::Approx((t.b1 - t.b1_q) / t.sigma).epsilon(1e-14));
}

TEST_CASE("swap coefficients match quadrature of the expected variance path") {
  ParamVector t = reference_ln_parameters();
  const auto [a, b] = oracle::swap_ab(t.b0_q, t.b1_q, kSwapHorizon);
  const SwapCoefficients k = swap_coefficients(t, kSwapHorizon);
  CHECK(std::abs(k.b / b - 1.0) < 1e-9);
  CHECK(std::abs(k.a / a - 1.0) < 1e-9);
  // Frozen oracle output.
  CHECK(k.b == doctest::Approx(1.642869177390211).epsilon(1e-12));
  CHECK(k.a == doctest::Approx(0.0034040033542198636).epsilon(1e-12));
  // Four-significant-figure agreement with the rounded reference values.
  CHECK(k.b == doctest::Approx(1.64289).epsilon(2e-5));
  CHECK(k.a == doctest::Approx(0.0034037).epsilon(1e-4));
}

TEST_CASE("swap coefficients for negative and small b1_q match quadrature") {
  for (double b1q : {-40.0, -5.0, -0.01, 1e-5, 0.3, 25.0}) {
    ParamVector t;
    t.b0_q = 0.07;
    t.b1_q = b1q;
    const auto [a, b] = oracle::swap_ab(t.b0_q, t.b1_q, kSwapHorizon);
    const SwapCoefficients k = swap_coefficients(t, kSwapHorizon);
    CHECK(std::abs(k.b / b - 1.0) < 1e-9);
    CHECK(std::abs(k.a / a - 1.0) < 1e-9);
    CHECK(k.b > 0.0);
  }
}

TEST_CASE("swap coefficient limits and continuity at the series switch") {
  ParamVector t;
  t.b0_q = 0.05;
  t.b1_q = 0.0;
  auto k = swap_coefficients(t, kSwapHorizon);
  CHECK(k.b == 1.0);
  CHECK(k.a == doctest::Approx(t.b0_q * kSwapHorizon / 2.0).epsilon(1e-15));

  t.b1_q = 10.9858;
  k = swap_coefficients(t, 1e-12);
  CHECK(k.b == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(k.a) < 1e-12);

  for (double sgn : {1.0, -1.0}) {
    const double z = sgn * 1e-6;
    ParamVector below = t, above = t;
    below.b1_q = z * (1.0 - 1e-9) / kSwapHorizon;
    above.b1_q = z * (1.0 + 1e-9) / kSwapHorizon;
    const auto kb = swap_coefficients(below, kSwapHorizon);
    const auto ka = swap_coefficients(above, kSwapHorizon);
    CHECK(std::abs(kb.b - ka.b) < 1e-10);
    CHECK(std::abs(kb.a - ka.a) < 1e-10 * t.b0_q);
  }

  for (double b1q = -500.0; b1q <= 500.0; b1q += 0.37) {
    t.b1_q = b1q;
    CHECK(swap_coefficients(t, kSwapHorizon).b > 0.0);
  }
  CHECK_THROWS_AS(swap_coefficients(t, 0.0), std::invalid_argument);
}

TEST_CASE("implied variance maps to instantaneous variance") {
  const SwapCoefficients identity{0.0, 1.0};
  CHECK(iv_to_v(0.04, identity) == 0.04);

  const ParamVector t = reference_ln_parameters();
  CHECK(iv_to_v(0.04, t, kSwapHorizon) == doctest::Approx(0.022275660867845187).epsilon(1e-12));
  CHECK(iv_to_v(0.04, t, kSwapHorizon) == doctest::Approx(0.0222755).epsilon(1e-4));

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> ivd(0.004, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double iv = ivd(gen);
    CHECK(v_to_iv(iv_to_v(iv, t, kSwapHorizon), t, kSwapHorizon) == doctest::Approx(iv).epsilon(1e-14));
  }
  CHECK_THROWS_AS(iv_to_v(0.003, t, kSwapHorizon), DomainViolation);
  CHECK_THROWS_AS(iv_to_v(0.0034040033542198636, t, kSwapHorizon), DomainViolation);
}

TEST_CASE("gamma transform round trip") {
  for (double v : {1e-6, 0.02, 3.0}) {
    CHECK(gamma_inverse(gamma_transform(v, 2.2), 2.2) == doctest::Approx(v).epsilon(1e-14));
  }
  CHECK_THROWS(gamma_transform(0.0, 2.0));
  CHECK_THROWS(gamma_transform(0.1, 0.0));
}

TEST_CASE("parameter bookkeeping") {
  CHECK(parameter_names(ModelSpec::ln()).size() == 7);
  CHECK(parameter_names(ModelSpec::nl()).size() == 10);
  CHECK(parameter_names(ModelSpec::rw()).empty());
  ParamVector t;
  set_parameter(t, "b2", -3.0);
  CHECK(t.b2 == -3.0);
  CHECK(get_parameter(t, "b2") == -3.0);
  CHECK_THROWS(get_parameter(t, "gamma"));

  const auto p = partition(ModelSpec::nl());
  CHECK(p.shared.size() + p.risk_neutral.size() + p.stock_physical.size() +
            p.variance_physical.size() == 10);

  CHECK(family_from_string(to_string(Family::NL)) == Family::NL);
  CHECK_THROWS(family_from_string("GARCH"));

  CHECK_NOTHROW(reference_nl_parameters().validate());
  ParamVector bad = reference_ln_parameters();
  bad.rho = 1.0;
  CHECK_THROWS(bad.validate());
  bad = reference_ln_parameters();
  bad.b0_q = 0.0;
  CHECK_THROWS(bad.validate());
  bad = reference_ln_parameters();
  bad.sigma = std::nan("");
  CHECK_THROWS(bad.validate());
}

TEST_CASE("log dynamics agree with the (X, V) drift through Ito's lemma") {
  const ParamVector t = reference_nl_parameters();
  const LogDynamics dyn(t, ModelSpec::nl());
  for (double v : {0.005, 0.02, 0.08}) {
    const LogState u{1.0, std::log(v) / t.sigma};
    const Eigen::Vector2d mu = dyn.drift(u);
    const Eigen::Vector2d p = drift_p({1.0, v}, t, ModelSpec::nl());
    CHECK(mu(0) == doctest::Approx(p(0)).epsilon(1e-14));
    CHECK(mu(1) == doctest::Approx(p(1) / (t.sigma * v) - t.sigma / 2).epsilon(1e-12));
    const Eigen::Matrix2d s = dyn.diffusion(u);
    const Eigen::Matrix2d sv = diffusion_matrix({1.0, v}, t);
    CHECK(s(0, 0) == doctest::Approx(sv(0, 0)).epsilon(1e-14));
    CHECK(s(0, 1) == doctest::Approx(sv(0, 1)).epsilon(1e-14));
    // V row divided by dV/dY = sigma V
    CHECK(s(1, 1) == doctest::Approx(sv(1, 1) / (t.sigma * v)).epsilon(1e-14));
  }
}

}  // TEST_SUITE
