// oqsynth: explicit Runge-Kutta integration with dense output.
//
// The primary integrator is the Dormand-Prince 5(4) embedded pair with
// FSAL, a PI step-size controller, and the classical fifth-order dense
// interpolant. A fixed-step fourth-order method is provided as a fallback
// for callers that must make progress after a step-size underflow; its
// dense output degrades to cubic Hermite interpolation.
//
// State types are Eigen vectors (real or complex). The right-hand side is
// any callable f(t, y) -> dy/dt.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/qlinalg.hpp>

namespace oqs {

struct IntegrationError : Error {
  using Error::Error;
};

struct StepTolerances {
  double rtol = 1e-8;
  double atol = 1e-10;
};

struct IntegrationStats {
  std::size_t n_accepted = 0;
  std::size_t n_rejected = 0;
  std::size_t n_rhs = 0;
  bool used_fixed_fallback = false;
};

namespace detail {
inline double cmag(double x) { return std::abs(x); }
inline double cmag(const cxd& x) { return std::abs(x); }
}  // namespace detail

// One accepted step's interpolation coefficients. Evaluation at local
// coordinate u in [0, 1] is
//   y(u) = r1 + u (r2 + (1-u)(r3 + u (r4 + (1-u) r5))),
// the standard fifth-order interpolant; r5 = 0 reduces to cubic Hermite.
template <class State>
struct DenseStep {
  double t = 0.0, h = 0.0;
  State r1, r2, r3, r4, r5;
};

template <class State>
class DenseSolution {
 public:
  double t0() const { return start_; }
  double tf() const { return end_; }

  State eval(double t) const {
    const auto& s = locate(t);
    const double u = (s.h != 0.0) ? (t - s.t) / s.h : 0.0;
    return s.r1 + u * (s.r2 + (1.0 - u) * (s.r3 + u * (s.r4 + (1.0 - u) * s.r5)));
  }

  // Derivative of the interpolant (exact within the polynomial model).
  State derivative(double t) const {
    const auto& s = locate(t);
    const double u = (s.h != 0.0) ? (t - s.t) / s.h : 0.0;
    State d = s.r2 + (1.0 - 2.0 * u) * (s.r3 + u * (s.r4 + (1.0 - u) * s.r5)) +
              u * (1.0 - u) * (s.r4 + (1.0 - 2.0 * u) * s.r5);
    return d / s.h;
  }

  const State& final_state() const { return final_; }

  void push(DenseStep<State> s) {
    knots_.push_back(s.t);
    steps_.push_back(std::move(s));
  }
  void finish(double tend, State yend) {
    end_ = tend;
    final_ = std::move(yend);
  }
  void set_start(double t) { start_ = t; }
  std::size_t step_count() const { return steps_.size(); }

 private:
  const DenseStep<State>& locate(double t) const {
    if (steps_.empty()) throw IntegrationError("dense solution is empty");
    const double span = std::max(std::abs(end_ - start_), 1e-300);
    if (t < start_ - 1e-9 * span || t > end_ + 1e-9 * span)
      throw IntegrationError("dense solution evaluated outside its span");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const std::size_t idx = (it == knots_.begin()) ? 0 : (it - knots_.begin() - 1);
    return steps_[std::min(idx, steps_.size() - 1)];
  }

  double start_ = 0.0, end_ = 0.0;
  std::vector<double> knots_;
  std::vector<DenseStep<State>> steps_;
  State final_;
};

namespace detail {

// Scaled RMS error norm used for step acceptance.
template <class State>
double error_norm(const State& err, const State& y0, const State& y1,
                  const StepTolerances& tol) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = tol.atol + tol.rtol * std::max(cmag(y0[i]), cmag(y1[i]));
    const double e = cmag(err[i]) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / double(err.size()));
}

template <class State, class RHS>
double initial_step(RHS& f, double t0, const State& y0, const State& f0, double hmax,
                    const StepTolerances& tol, IntegrationStats& st) {
  double dny = 0.0, dnf = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sc = tol.atol + tol.rtol * cmag(y0[i]);
    dny += std::pow(cmag(y0[i]) / sc, 2);
    dnf += std::pow(cmag(f0[i]) / sc, 2);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
  h = std::min(h, hmax);
  State y1 = y0 + h * f0;
  State f1 = f(t0 + h, y1);
  ++st.n_rhs;
  double der2 = 0.0;
  for (Eigen::Index i = 0; i < y0.size(); ++i) {
    const double sc = tol.atol + tol.rtol * cmag(y0[i]);
    der2 += std::pow(cmag(f1[i] - f0[i]) / sc, 2);
  }
  der2 = std::sqrt(der2) / h;
  const double der12 = std::max(der2, std::sqrt(dnf));
  const double h1 =
      (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  return std::min({100.0 * h, h1, hmax});
}

}  // namespace detail

// Adaptive 5(4) integration of y' = f(t, y) from t0 to tf (tf > t0).
// Throws IntegrationError on step-size underflow, reporting the time
// reached; callers needing unconditional progress can then switch to
// integrate_rk4 and flag the fallback.
template <class State, class RHS>
DenseSolution<State> integrate_dopri5(RHS&& f, const State& y0, double t0, double tf,
                                      StepTolerances tol = {},
                                      IntegrationStats* stats = nullptr,
                                      double h_init = 0.0,
                                      std::size_t max_steps = 5'000'000) {
  if (!(tf > t0)) throw IntegrationError("integrate_dopri5: requires tf > t0");
  // Dormand-Prince coefficients.
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;
  static constexpr double safe = 0.9, beta = 0.04;
  static constexpr double expo1 = 0.2 - beta * 0.75;
  static constexpr double facc1 = 5.0;   // max step growth
  static constexpr double facc2 = 0.1;   // max step shrink

  IntegrationStats local;
  IntegrationStats& st = stats ? *stats : local;
  DenseSolution<State> sol;
  sol.set_start(t0);

  const double hmax = tf - t0;
  double t = t0;
  State y = y0;
  State k1 = f(t, y);
  ++st.n_rhs;
  double h = (h_init > 0.0) ? std::min(h_init, hmax)
                            : detail::initial_step(f, t0, y, k1, hmax, tol, st);
  double facold = 1e-4;
  bool last_rejected = false;

  while (t < tf) {
    if (st.n_accepted + st.n_rejected > max_steps)
      throw IntegrationError("integrate_dopri5: step budget exhausted at t = " +
                             std::to_string(t));
    if (h < 1e-14 * hmax || t + h == t)
      throw IntegrationError("integrate_dopri5: step-size underflow at t = " +
                             std::to_string(t));
    if (t + h > tf) h = tf - t;

    State k2 = f(t + c2 * h, y + h * (a21 * k1));
    State k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    State k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    State k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    State k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    State ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    State k7 = f(t + h, ynew);
    st.n_rhs += 6;

    State errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = detail::error_norm(errv, y, ynew, tol);

    if (err <= 1.0) {
      // Accept; record the dense interpolant for this step.
      DenseStep<State> ds;
      ds.t = t;
      ds.h = h;
      ds.r1 = y;
      ds.r2 = ynew - y;
      ds.r3 = h * k1 - ds.r2;
      ds.r4 = ds.r2 - h * k7 - ds.r3;
      ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.push(std::move(ds));

      ++st.n_accepted;
      t += h;
      y = std::move(ynew);
      k1 = std::move(k7);  // FSAL

      double fac = std::pow(err, expo1) / std::pow(facold, beta);
      facold = std::max(err, 1e-4);
      fac = std::max(1.0 / facc1, std::min(1.0 / facc2, fac / safe));
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      h = std::min(hnew, hmax);
      last_rejected = false;
    } else {
      ++st.n_rejected;
      h /= std::min(facc1, std::pow(err, 0.2) / safe);
      last_rejected = true;
    }
  }
  sol.finish(tf, std::move(y));
  return sol;
}

// Fixed-step classical fourth-order method; dense output is cubic Hermite.
template <class State, class RHS>
DenseSolution<State> integrate_rk4(RHS&& f, const State& y0, double t0, double tf,
                                   std::size_t n_steps,
                                   IntegrationStats* stats = nullptr) {
  if (!(tf > t0) || n_steps == 0) throw IntegrationError("integrate_rk4: bad span");
  IntegrationStats local;
  IntegrationStats& st = stats ? *stats : local;
  st.used_fixed_fallback = true;
  DenseSolution<State> sol;
  sol.set_start(t0);
  const double h = (tf - t0) / double(n_steps);
  State y = y0;
  State f0 = f(t0, y);
  ++st.n_rhs;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = t0 + double(i) * h;
    State k1 = f0;
    State k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    State k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    State k4 = f(t + h, y + h * k3);
    State ynew = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tnew = (i + 1 == n_steps) ? tf : t + h;
    State f1 = f(tnew, ynew);
    st.n_rhs += 4;
    DenseStep<State> ds;
    ds.t = t;
    ds.h = h;
    ds.r1 = y;
    ds.r2 = ynew - y;
    ds.r3 = h * k1 - ds.r2;
    ds.r4 = ds.r2 - h * f1 - ds.r3;
    ds.r5 = State::Zero(y.size());
    sol.push(std::move(ds));
    y = std::move(ynew);
    f0 = std::move(f1);
    ++st.n_accepted;
  }
  sol.finish(tf, std::move(y));
  return sol;
}

}  // namespace oqs
