// oqsynth: tests for su(N) charts and steady-state Bloch closed forms.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#include <catch_amalgamated.hpp>

#include <oqsynth/blochsu.hpp>

#include <random>

using namespace oqs;

namespace {

Mat random_density(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cxd(g(rng), g(rng));
  Mat rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_CASE("su(N) generators are Hermitian, traceless, orthonormal") {
  for (int n : {2, 3}) {
    const auto& T = su_generators(n);
    REQUIRE(T.size() == static_cast<size_t>(n * n - 1));
    for (size_t a = 0; a < T.size(); ++a) {
      REQUIRE((T[a] - T[a].adjoint()).norm() <= 1e-15);
      REQUIRE(std::abs(T[a].trace()) <= 1e-15);
      for (size_t b = 0; b < T.size(); ++b) {
        const double want = (a == b) ? 2.0 : 0.0;
        REQUIRE(std::abs((T[a] * T[b]).trace().real() - want) <= 1e-14);
      }
    }
  }
}

TEST_CASE("bloch chart round trip and purity bounds") {
  std::mt19937_64 rng(101);
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 25; ++trial) {
      Mat rho = random_density(n, rng);
      RVec r = to_bloch(rho);
      REQUIRE((from_bloch(r, n) - rho).norm() <= 1e-14);
      REQUIRE(r.squaredNorm() <= 1.0 + 1e-12);
    }
    // Pure state saturates |r| = 1.
    Mat pure = Mat::Zero(n, n);
    pure(n - 1, n - 1) = 1.0;
    REQUIRE(std::abs(to_bloch(pure).norm() - 1.0) <= 1e-9);
  }
  REQUIRE_THROWS_AS(su_generators(4), DimensionError);
}

TEST_CASE("from_bloch validation rejects unphysical vectors") {
  RVec r = RVec::Zero(8);
  r(2) = -1.0;  // unit length but outside the physical body of su(3)
  REQUIRE_NOTHROW(from_bloch(r, 3));
  REQUIRE_THROWS_AS(from_bloch(r, 3, true), UnphysicalStateError);
  Mat mixed = Mat::Zero(3, 3);
  mixed(0, 0) = 0.5;
  mixed(1, 1) = 0.3;
  mixed(2, 2) = 0.2;
  REQUIRE_NOTHROW(from_bloch(to_bloch(mixed), 3, true));
}

TEST_CASE("two-level steady state closed form") {
  // Resonant drive equal to the decay rate at zero temperature.
  Eigen::Vector3d r = two_level_steady_bloch(1.0, 1.0, 0.0);
  Mat rho = from_bloch(RVec(r), 2);
  Mat want(2, 2);
  want << cxd(1.0 / 3.0), cxd(0, -1.0 / 3.0), cxd(0, 1.0 / 3.0), cxd(2.0 / 3.0);
  REQUIRE((rho - want).norm() <= 1e-14);

  // Zero drive relaxes to the thermal populations.
  Eigen::Vector3d r0 = two_level_steady_bloch(0.0, 2.0, 0.25);
  REQUIRE(r0(0) == 0.0);
  REQUIRE(r0(1) == 0.0);
  REQUIRE(r0(2) == Catch::Approx(-1.0 / 1.5).margin(1e-15));
}

TEST_CASE("lambda steady state closed form is a physical fixed point") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (int trial = 0; trial < 30; ++trial) {
    const double op = u(rng), os = u(rng), G = u(rng), N = 0.25 * u(rng);
    Mat rho = lambda_steady_rho(op, os, G, N);
    REQUIRE(std::abs(rho.trace() - cxd(1.0)) <= 1e-14);
    REQUIRE((rho - rho.adjoint()).norm() <= 1e-15);
    REQUIRE(min_eigenvalue(rho) >= -1e-14);
    RVec r = lambda_steady_bloch(op, os, G, N);
    // T5 component vanishes identically; the T1 component as well.
    REQUIRE(std::abs(r(0)) <= 1e-14);
    REQUIRE(std::abs(r(4)) <= 1e-14);
  }
}

TEST_CASE("lambda steady state at zero occupation is the dark-state projector") {
  const double op = 1.3, os = 0.6, G = 2.0;
  Mat rho = lambda_steady_rho(op, os, G, 0.0);
  const double o2 = op * op + os * os;
  CVec dark(3);
  dark << os / std::sqrt(o2), 0.0, -op / std::sqrt(o2);
  Mat want = dark * dark.adjoint();
  REQUIRE((rho - want).norm() <= 1e-14);
}

TEST_CASE("lambda steady-state derivative along theta matches finite differences") {
  const double om = 1.54e5, N = 6.55e-7, G = 1.5e6, th = 0.6, h = 1e-7;
  Mat fd = (lambda_steady_rho(om * std::sin(th + h), om * std::cos(th + h), G, N) -
            lambda_steady_rho(om * std::sin(th - h), om * std::cos(th - h), G, N)) /
           (2.0 * h);
  Mat an = lambda_steady_rho_dtheta(om, th, G, N);
  REQUIRE((fd - an).cwiseAbs().maxCoeff() <= 1e-8);
}
