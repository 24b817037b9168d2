// oqsynth: dense complex linear algebra for vectorized open-system dynamics.
//
// Conventions used across the library:
//   * density matrices are Eigen::MatrixXcd, vectorized row-major
//     (vec(rho)[i*n + j] = rho(i, j)), so that vec(A X B) = (A kron B^T) vec(X)
//   * all rates and frequencies are angular unless a caller converts them
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace oqs {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

// Base error type; subtypes let callers distinguish failure modes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
// Kernel dimension of the generator is not exactly one.
struct AmbiguousSteadyStateError : Error {
  using Error::Error;
};
// Bordered system has no solution (empty kernel or constraint degenerate).
struct NoSteadyStateError : Error {
  using Error::Error;
};
struct NonHermitianError : Error {
  using Error::Error;
};
struct UnphysicalStateError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

inline Mat kron(const Mat& a, const Mat& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline Mat dagger(const Mat& a) { return a.adjoint(); }

inline Mat hermitize(const Mat& a) { return 0.5 * (a + a.adjoint()); }

// Row-major vectorization: vec(rho)[i*n + j] = rho(i, j).
inline CVec vec_row(const Mat& rho) {
  const Eigen::Index n = rho.rows(), m = rho.cols();
  CVec v(n * m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) v(i * m + j) = rho(i, j);
  return v;
}

inline Mat unvec_row(const CVec& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
  if (n * n != v.size()) throw DimensionError("unvec_row: length is not a perfect square");
  Mat rho(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rho(i, j) = v(i * n + j);
  return rho;
}

// Identity functional <<I| as a row vector in the row-major chart.
inline CVec vec_identity(Eigen::Index n) {
  return vec_row(Mat::Identity(n, n));
}

struct LsqOptions {
  double rank_tol = 1e-13;  // singular values below rank_tol * sv_max are dropped
  int refine = 2;           // iterative refinement passes
};

struct LsqResult {
  RVec x;
  double residual = 0.0;  // ||A x - b||_2 on the unscaled system
  double rhs_norm = 0.0;  // ||b||_2
  int rank = 0;
  bool rank_deficient = false;
  RVec singular_values;  // of the column-equilibrated matrix
};

// Column-equilibrated truncated-SVD least squares with optional seed.
// The seed shifts the system to x = seed + dx so that tiny corrections to a
// good initial guess survive the truncation, and is also the value returned
// for directions the truncation removed.
inline LsqResult least_squares(const RMat& A, const RVec& b, const RVec* seed = nullptr,
                               const LsqOptions& opt = {}) {
  if (A.rows() != b.size()) throw DimensionError("least_squares: row mismatch");
  const Eigen::Index ncol = A.cols();
  RVec scale(ncol);
  for (Eigen::Index j = 0; j < ncol; ++j) {
    const double s = A.col(j).norm();
    scale(j) = (s > 0.0) ? s : 1.0;
  }
  RMat As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<RMat> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  const double cut = (sv.size() > 0 ? sv(0) : 0.0) * opt.rank_tol;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++rank;

  RVec x0 = seed ? *seed : RVec::Zero(ncol);
  auto solve_scaled = [&](const RVec& rhs) {
    RVec y = svd.matrixU().transpose() * rhs;
    for (Eigen::Index k = 0; k < sv.size(); ++k) y(k) = (sv(k) > cut) ? y(k) / sv(k) : 0.0;
    return RVec(svd.matrixV() * y);
  };
  RVec xs = solve_scaled(b - A * x0);
  for (int it = 0; it < opt.refine; ++it) {
    RVec r = (b - A * x0) - As * xs;
    xs += solve_scaled(r);
  }
  LsqResult out;
  out.x = x0 + scale.cwiseInverse().asDiagonal() * xs;
  out.residual = (A * out.x - b).norm();
  out.rhs_norm = b.norm();
  out.rank = rank;
  out.rank_deficient = rank < static_cast<int>(ncol);
  out.singular_values = sv;
  return out;
}

// Complex least squares via stacking real and imaginary parts.
inline LsqResult least_squares(const Mat& A, const CVec& b, const RVec* seed = nullptr,
                               const LsqOptions& opt = {}) {
  RMat As(2 * A.rows(), A.cols());
  As << A.real(), A.imag();
  RVec bs(2 * b.size());
  bs << b.real(), b.imag();
  return least_squares(As, bs, seed, opt);
}

// Solve m v = 0 subject to (constraint . v) = value by appending the
// constraint as a bordered row. The kernel of m must be one-dimensional;
// a larger kernel raises AmbiguousSteadyStateError and an empty one (or a
// constraint that annihilates the kernel vector) raises NoSteadyStateError.
inline CVec solve_bordered_nullvector(const Mat& m, const Eigen::RowVectorXcd& constraint,
                                      cxd value, double kernel_tol = 1e-10) {
  if (m.rows() != m.cols() || constraint.size() != m.cols())
    throw DimensionError("solve_bordered_nullvector: shape mismatch");
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int kernel_dim = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) <= kernel_tol * smax) ++kernel_dim;
  if (smax == 0.0) kernel_dim = static_cast<int>(sv.size());
  if (kernel_dim == 0)
    throw NoSteadyStateError("solve_bordered_nullvector: generator has trivial kernel");
  if (kernel_dim > 1)
    throw AmbiguousSteadyStateError(
        "solve_bordered_nullvector: kernel dimension " + std::to_string(kernel_dim) +
        ", steady state not unique");
  CVec v = svd.matrixV().col(sv.size() - 1);
  const cxd c = constraint * v;
  if (std::abs(c) < 1e-12)
    throw NoSteadyStateError("solve_bordered_nullvector: constraint degenerate on kernel");
  v *= value / c;
  // Bordered consistency check: the kernel vector must actually annihilate m.
  const double mnorm = m.norm();
  if ((m * v).norm() > 1e-10 * std::max(mnorm, 1.0) * v.norm())
    throw NoSteadyStateError("solve_bordered_nullvector: residual too large for a kernel vector");
  return v;
}

inline double min_eigenvalue(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho));
  return es.eigenvalues().minCoeff();
}

// Hermitian square root with eigenvalue clamping at zero.
inline Mat sqrt_psd(const Mat& rho) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho));
  RVec d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline double uhlmann_fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw DimensionError("uhlmann_fidelity: dimension mismatch");
  const Mat sr = sqrt_psd(rho);
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(sr * sigma * sr));
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    s += std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  return s * s;
}

inline double trace_distance(const Mat& rho, const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(rho - sigma));
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double population(const Mat& rho, Eigen::Index level) {
  if (level < 0 || level >= rho.rows()) throw DimensionError("population: level out of range");
  return rho(level, level).real();
}

}  // namespace oqs
