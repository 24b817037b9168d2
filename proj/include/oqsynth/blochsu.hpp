// oqsynth: su(N) generator charts and generalized Bloch coordinates.
//
// The chart is normalized so that rho = (I + sqrt(n(n-1)/2) sum_k r_k T_k)/n
// and r_k = n/(2 sqrt(n(n-1)/2)) tr(rho T_k); pure states satisfy |r| = 1.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/qlinalg.hpp>

namespace oqs {

// Pauli matrices for n = 2, standard Gell-Mann order for n = 3.
inline const std::vector<Mat>& su_generators(int n) {
  static const std::vector<Mat> su2 = [] {
    std::vector<Mat> t(3, Mat::Zero(2, 2));
    t[0] << 0, 1, 1, 0;
    t[1] << 0, cxd(0, -1), cxd(0, 1), 0;
    t[2] << 1, 0, 0, -1;
    return t;
  }();
  static const std::vector<Mat> su3 = [] {
    auto E = [](int i, int j) {
      Mat m = Mat::Zero(3, 3);
      m(i, j) = 1;
      return m;
    };
    const cxd im(0, 1);
    std::vector<Mat> t;
    t.push_back(E(0, 1) + E(1, 0));
    t.push_back(-im * E(0, 1) + im * E(1, 0));
    t.push_back((Mat(3, 3) << 1, 0, 0, 0, -1, 0, 0, 0, 0).finished());
    t.push_back(E(0, 2) + E(2, 0));
    t.push_back(-im * E(0, 2) + im * E(2, 0));
    t.push_back(E(1, 2) + E(2, 1));
    t.push_back(-im * E(1, 2) + im * E(2, 1));
    t.push_back((Mat(3, 3) << 1, 0, 0, 0, 1, 0, 0, 0, -2).finished() / std::sqrt(3.0));
    return t;
  }();
  if (n == 2) return su2;
  if (n == 3) return su3;
  throw DimensionError("su_generators: only n = 2 and n = 3 are provided");
}

inline RVec to_bloch(const Mat& rho) {
  const int n = static_cast<int>(rho.rows());
  const auto& T = su_generators(n);
  const double c = n / (2.0 * std::sqrt(n * (n - 1) / 2.0));
  RVec r(T.size());
  for (size_t k = 0; k < T.size(); ++k) r(k) = c * (rho * T[k]).trace().real();
  return r;
}

// validate = true rejects Bloch vectors whose density matrix has an
// eigenvalue below -1e-9 (outside the physical body of the chart).
inline Mat from_bloch(const RVec& r, int n, bool validate = false) {
  const auto& T = su_generators(n);
  if (r.size() != static_cast<Eigen::Index>(T.size()))
    throw DimensionError("from_bloch: component count does not match su(n)");
  const double c = std::sqrt(n * (n - 1) / 2.0);
  Mat rho = Mat::Identity(n, n);
  for (size_t k = 0; k < T.size(); ++k) rho += c * r(k) * T[k];
  rho /= double(n);
  if (validate && min_eigenvalue(rho) < -1e-9)
    throw UnphysicalStateError("from_bloch: vector lies outside the physical body");
  return rho;
}

// Steady state of a resonantly driven two-level system with thermal decay:
// drive amplitude om0 (H = om0/2 sigma_x), decay rate gamma, occupation n0.
// Components are (r_x, r_y, r_z).
inline Eigen::Vector3d two_level_steady_bloch(double om0, double gamma, double n0) {
  const double x = om0 / gamma;
  const double w = 2.0 * n0 + 1.0;
  const double p = w * w + 2.0 * x * x;
  return {0.0, 2.0 * x / p, -w / p};
}

// Closed-form steady state of the driven Lambda system with equal decay
// rates G on both arms, thermal occupation N, and pump/Stokes amplitudes
// op, os. Basis order is {lower-left, excited, lower-right}.
inline Mat lambda_steady_rho(double op, double os, double G, double N) {
  const double o2 = op * op + os * os;
  const double z = (3.0 * N + 1.0) * o2 + N * G * G * (3.0 * N + 2.0) * (3.0 * N + 2.0);
  const double dterm = (3.0 * N * N + 2.0 * N) * (N + 1.0) * G * G + N * o2;
  const cxd im(0, 1);
  Mat rho(3, 3);
  rho << dterm + os * os, im * N * G * op, -op * os,
      -im * N * G * op, N * N * (3.0 * N + 2.0) * G * G + N * o2, -im * N * G * os,
      -op * os, im * N * G * os, dterm + op * op;
  return rho / z;
}

// Derivative of lambda_steady_rho along theta with op = om sin(theta),
// os = om cos(theta); the normalization z is constant on that circle.
inline Mat lambda_steady_rho_dtheta(double om, double theta, double G, double N) {
  const double op = om * std::sin(theta), os = om * std::cos(theta);
  const double dop = os, dos = -op;
  const double z =
      (3.0 * N + 1.0) * om * om + N * G * G * (3.0 * N + 2.0) * (3.0 * N + 2.0);
  const cxd im(0, 1);
  Mat d(3, 3);
  d << 2.0 * os * dos, im * N * G * dop, -(dop * os + op * dos),
      -im * N * G * dop, 0.0, -im * N * G * dos,
      -(dop * os + op * dos), im * N * G * dos, 2.0 * op * dop;
  return d / z;
}

inline RVec lambda_steady_bloch(double op, double os, double G, double N) {
  return to_bloch(lambda_steady_rho(op, os, G, N));
}

}  // namespace oqs
