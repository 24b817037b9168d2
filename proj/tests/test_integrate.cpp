// oqsynth: tests for the adaptive integrator and its dense output.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#include <catch_amalgamated.hpp>

#include <oqsynth/integrate.hpp>

using namespace oqs;
using Vec1 = Eigen::Matrix<double, 1, 1>;

TEST_CASE("exponential decay reaches the analytic endpoint") {
  auto rhs = [](double, const Vec1& y) -> Vec1 { return -y; };
  Vec1 y0;
  y0 << 1.0;
  IntegrationStats st;
  auto sol = integrate_dopri5(rhs, y0, 0.0, 5.0, {1e-10, 1e-12}, &st);
  REQUIRE(std::abs(sol.final_state()(0) - std::exp(-5.0)) <= 1e-11);
  REQUIRE(st.n_accepted > 10);
  REQUIRE_FALSE(st.used_fixed_fallback);
}

TEST_CASE("harmonic oscillator dense output is accurate between steps") {
  auto rhs = [](double, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    return {y(1), -y(0)};
  };
  Eigen::Vector2d y0{1.0, 0.0};
  const double tf = 20.0;
  auto sol = integrate_dopri5(rhs, y0, 0.0, tf, {1e-9, 1e-12});
  double worst = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double t = tf * i / 2000.0;
    Eigen::Vector2d y = sol.eval(t);
    worst = std::max(worst, std::abs(y(0) - std::cos(t)));
    worst = std::max(worst, std::abs(y(1) + std::sin(t)));
  }
  // The interpolant must hold the integration accuracy, not just the knots.
  REQUIRE(worst <= 5e-8);

  // Interpolant derivative approximates the vector field.
  for (double t : {0.37, 7.77, 19.2}) {
    Eigen::Vector2d d = sol.derivative(t);
    Eigen::Vector2d y = sol.eval(t);
    REQUIRE((d - rhs(t, y)).norm() <= 1e-6);
  }
}

TEST_CASE("complex phase rotation") {
  const double w = 3.0;
  auto rhs = [&](double, const CVec& y) -> CVec { return cxd(0, -w) * y; };
  CVec y0(1);
  y0 << cxd(1.0, 0.0);
  auto sol = integrate_dopri5(rhs, y0, 0.0, 4.0, {1e-11, 1e-13});
  const cxd want = std::exp(cxd(0, -w * 4.0));
  REQUIRE(std::abs(sol.final_state()(0) - want) <= 1e-10);
}

TEST_CASE("tightening tolerances tightens the result") {
  auto rhs = [](double t, const Vec1& y) -> Vec1 {
    Vec1 d;
    d << std::cos(t) * y(0);
    return d;
  };
  Vec1 y0;
  y0 << 1.0;
  const double tf = 10.0;
  const double exact = std::exp(std::sin(tf));
  auto loose = integrate_dopri5(rhs, y0, 0.0, tf, {1e-6, 1e-8});
  auto tight = integrate_dopri5(rhs, y0, 0.0, tf, {1e-12, 1e-14});
  const double e_loose = std::abs(loose.final_state()(0) - exact);
  const double e_tight = std::abs(tight.final_state()(0) - exact);
  REQUIRE(e_tight < e_loose);
  REQUIRE(e_loose <= 1e-4);
  REQUIRE(e_tight <= 1e-10);
}

TEST_CASE("oversized initial step is rejected and recovered from") {
  auto rhs = [](double, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    return {y(1), -25.0 * y(0)};
  };
  Eigen::Vector2d y0{1.0, 0.0};
  IntegrationStats st;
  auto sol = integrate_dopri5(rhs, y0, 0.0, 10.0, {1e-10, 1e-12}, &st, 10.0);
  REQUIRE(st.n_rejected >= 1);
  REQUIRE(std::abs(sol.final_state()(0) - std::cos(5.0 * 10.0)) <= 1e-7);
}

TEST_CASE("singular right-hand side raises a step-size error") {
  auto rhs = [](double t, const Vec1& y) -> Vec1 {
    Vec1 d;
    d << y(0) / (1.0 - t);
    return d;
  };
  Vec1 y0;
  y0 << 1.0;
  REQUIRE_THROWS_AS(integrate_dopri5(rhs, y0, 0.0, 2.0, {1e-8, 1e-10}), IntegrationError);
}

TEST_CASE("dense solution refuses evaluation outside its span") {
  auto rhs = [](double, const Vec1& y) -> Vec1 { return -y; };
  Vec1 y0;
  y0 << 1.0;
  auto sol = integrate_dopri5(rhs, y0, 0.0, 1.0);
  REQUIRE_THROWS_AS(sol.eval(1.5), IntegrationError);
  REQUIRE_THROWS_AS(sol.eval(-0.5), IntegrationError);
  REQUIRE_NOTHROW(sol.eval(0.0));
  REQUIRE_NOTHROW(sol.eval(1.0));
}

TEST_CASE("fixed-step fallback converges at fourth order and sets its flag") {
  auto rhs = [](double, const Eigen::Vector2d& y) -> Eigen::Vector2d {
    return {y(1), -y(0)};
  };
  Eigen::Vector2d y0{1.0, 0.0};
  const double tf = 6.0;
  IntegrationStats st;
  auto coarse = integrate_rk4(rhs, y0, 0.0, tf, 200, &st);
  auto fine = integrate_rk4(rhs, y0, 0.0, tf, 400);
  REQUIRE(st.used_fixed_fallback);
  const double ec = std::abs(coarse.final_state()(0) - std::cos(tf));
  const double ef = std::abs(fine.final_state()(0) - std::cos(tf));
  REQUIRE(ec / ef == Catch::Approx(16.0).epsilon(0.15));

  // Cubic Hermite dense output stays within a few orders of the step error.
  double worst = 0.0;
  for (int i = 0; i <= 500; ++i) {
    const double t = tf * i / 500.0;
    worst = std::max(worst, std::abs(fine.eval(t)(0) - std::cos(t)));
  }
  REQUIRE(worst <= 1e-6);
}
