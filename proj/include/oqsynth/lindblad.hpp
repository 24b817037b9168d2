// oqsynth: Liouvillian assembly, steady states, and master-equation
// propagation for Lindblad open-system models.
//
// Superoperators act on row-major vectorized density matrices:
//   ham_super(H)  = -i (H kron I - I kron H^T)
//   diss_super(L) = L kron L* - 1/2 (L'L kron I + I kron (L'L)^T)
// A thermal channel with rate G and occupation N contributes
//   G ((N+1) diss_super(L) + N diss_super(L')).
// All frequencies and rates are angular, hbar = 1.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/integrate.hpp>
#include <oqsynth/qlinalg.hpp>

#include <functional>
#include <memory>

namespace oqs {

struct NegativeRateError : Error {
  using Error::Error;
};

using SuperFn = std::function<Mat(double)>;

inline Mat ham_super(const Mat& h) {
  const Eigen::Index n = h.rows();
  const Mat id = Mat::Identity(n, n);
  return cxd(0, -1) * (kron(h, id) - kron(id, h.transpose()));
}

inline Mat diss_super(const Mat& l) {
  const Eigen::Index n = l.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat ldl = l.adjoint() * l;
  return kron(l, l.conjugate()) - 0.5 * (kron(ldl, id) + kron(id, ldl.transpose()));
}

// Thermal pair: G ((N+1) D[L] + N D[L']). Negative occupation is accepted
// (synthesized schedules may request it); negative rate is not.
inline Mat thermal_super(const Mat& l, double rate, double n_occ) {
  if (rate < 0.0) throw NegativeRateError("thermal_super: negative rate");
  return rate * ((n_occ + 1.0) * diss_super(l) + n_occ * diss_super(l.adjoint()));
}

struct DissipationChannel {
  Mat jump;
  double rate = 0.0;
  double n_occ = 0.0;
  // When >= 0, the occupation is read from this entry of the control record
  // instead of n_occ (used by schedules that steer N in time).
  int n_control_index = -1;
};

struct LindbladModel {
  int dim = 0;
  // Hamiltonian as a function of the control record for one instant.
  std::function<Mat(const RVec& controls)> hamiltonian;
  std::vector<DissipationChannel> channels;
  // Fixed channels enter as rate * diss_super(jump) (e.g. pure dephasing).
  std::vector<std::pair<Mat, double>> fixed_channels;
};

inline Mat assemble_liouvillian(const Mat& h, const std::vector<DissipationChannel>& channels,
                                const std::vector<std::pair<Mat, double>>& fixed = {}) {
  const double hnorm = h.norm();
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(hnorm, 1.0))
    throw NonHermitianError("assemble_liouvillian: Hamiltonian is not Hermitian");
  Mat l = ham_super(h);
  for (const auto& c : channels) l += thermal_super(c.jump, c.rate, c.n_occ);
  for (const auto& [jump, rate] : fixed) {
    if (rate < 0.0) throw NegativeRateError("assemble_liouvillian: negative fixed rate");
    l += rate * diss_super(jump);
  }
  return l;
}

inline Mat liouvillian_at(const LindbladModel& m, const RVec& controls) {
  Mat l = ham_super(m.hamiltonian(controls));
  for (const auto& c : m.channels) {
    const double n = (c.n_control_index >= 0) ? controls(c.n_control_index) : c.n_occ;
    if (c.rate < 0.0) throw NegativeRateError("liouvillian_at: negative rate");
    l += c.rate * ((n + 1.0) * diss_super(c.jump) + n * diss_super(c.jump.adjoint()));
  }
  for (const auto& [jump, rate] : m.fixed_channels) l += rate * diss_super(jump);
  return l;
}

// Unique steady state of a Liouvillian with one-dimensional kernel,
// returned Hermitian with unit trace.
inline Mat steady_state(const Mat& lsup) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(lsup.rows()))));
  CVec v = solve_bordered_nullvector(lsup, vec_identity(n).transpose(), 1.0);
  Mat rho = hermitize(unvec_row(v));
  return rho / rho.trace().real();
}

struct PropagationOptions {
  StepTolerances tol{1e-8, 1e-10};
  int n_store = 201;
  bool rk4_fallback = true;       // retry with the fixed-step method on underflow
  std::size_t rk4_steps = 200000;
  std::size_t max_steps = 5'000'000;
  bool enforce_physicality = true;  // min eigenvalue < -1e-9 at a stored time throws
};

struct PropagationResult {
  RVec times;
  std::vector<Mat> states;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;
  double max_hermiticity_defect = 0.0;
  double error_estimate = 0.0;  // crude global bound from the step tolerances
  IntegrationStats stats;
  std::shared_ptr<DenseSolution<CVec>> dense;
  const Mat& final_state() const { return states.back(); }
  // Continuous readout of the integrated trajectory.
  Mat state_at(double t) const { return unvec_row(dense->eval(t)); }
};

// Propagate vec(rho)' = rhs(t, vec(rho)) and score the stored states.
template <class RHS>
PropagationResult propagate_rhs(RHS&& rhs, const Mat& rho0, double t0, double tf,
                                const PropagationOptions& opt = {}) {
  PropagationResult out;
  CVec y0 = vec_row(rho0);
  DenseSolution<CVec> sol;
  try {
    sol = integrate_dopri5(rhs, y0, t0, tf, opt.tol, &out.stats, 0.0, opt.max_steps);
  } catch (const IntegrationError&) {
    if (!opt.rk4_fallback) throw;
    out.stats = {};
    sol = integrate_rk4(rhs, y0, t0, tf, opt.rk4_steps, &out.stats);
  }
  out.dense = std::make_shared<DenseSolution<CVec>>(std::move(sol));
  const int n = std::max(2, opt.n_store);
  out.times.resize(n);
  out.states.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (tf - t0) * double(i) / double(n - 1);
    out.times(i) = t;
    Mat rho = unvec_row(out.dense->eval(t));
    out.max_trace_drift = std::max(out.max_trace_drift, std::abs(rho.trace().real() - 1.0) +
                                                            std::abs(rho.trace().imag()));
    out.max_hermiticity_defect =
        std::max(out.max_hermiticity_defect, (rho - rho.adjoint()).norm());
    out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(rho));
    out.states.push_back(std::move(rho));
  }
  out.error_estimate =
      (opt.tol.rtol + opt.tol.atol) * std::max<std::size_t>(out.stats.n_accepted, 1);
  if (opt.enforce_physicality && out.min_eigenvalue < -1e-9)
    throw UnphysicalStateError("propagate: state eigenvalue " +
                               std::to_string(out.min_eigenvalue) + " below -1e-9");
  return out;
}

inline PropagationResult propagate(const SuperFn& liouvillian, const Mat& rho0, double t0,
                                   double tf, const PropagationOptions& opt = {}) {
  auto rhs = [&liouvillian](double t, const CVec& y) -> CVec { return liouvillian(t) * y; };
  return propagate_rhs(rhs, rho0, t0, tf, opt);
}

}  // namespace oqs
