// oqsynth: synthesized-protocol bundle shared by the control-synthesis
// modules. A Protocol carries the sampled schedule next to the exact
// control law that produced it, the model binding, the prepared initial
// and intended final states, and the declared boundary control records.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/invariant.hpp>
#include <oqsynth/lindblad.hpp>
#include <oqsynth/schedule.hpp>

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace oqs {

// A prescribed trajectory asks for more coherence than the dissipative
// dynamics can supply (its required quadrature budget turns negative).
struct InfeasibleTrajectoryError : Error {
  using Error::Error;
};

// A target path collapses to a single ray, so the control directions that
// should steer it are undetermined.
struct DegenerateScheduleError : Error {
  using Error::Error;
};

using ControlFn = std::function<RVec(double)>;

struct Protocol {
  LindbladModel model;
  Schedule schedule;          // sampled control channels for emission
  ControlFn control_fn;       // exact control law behind the schedule
  Mat rho0;                   // prepared initial state
  Mat target;                 // intended final state
  RVec boundary_start;        // declared control record at t0
  RVec boundary_end;          // declared control record at tf
  TrajectoryFn ref_state_fn;  // prescribed instantaneous reference, if any
  double t0 = 0.0;
  double tf = 0.0;

  Mat liouvillian(double t) const { return liouvillian_at(model, control_fn(t)); }

  // Self-contained callable, safe to use after the Protocol is moved.
  SuperFn liouvillian_fn() const {
    auto m = model;
    auto c = control_fn;
    return [m = std::move(m), c = std::move(c)](double t) { return liouvillian_at(m, c(t)); };
  }
};

// Sample a control law onto a grid. Derivative columns come from central
// differences of width fd_frac * span; rows within one width of an endpoint
// use an offset one-sided stencil that never evaluates outside the span and
// skips the endpoint sample itself (control laws may pin special values
// exactly at the boundary).
inline Schedule sample_schedule(const ControlFn& f, std::vector<std::string> names,
                                const std::vector<double>& grid, double fd_frac = 1e-6) {
  if (grid.size() < 2) throw Error("sample_schedule: need at least two grid points");
  Schedule s;
  s.names = std::move(names);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double t0 = grid.front(), tf = grid.back();
  const double h = fd_frac * (tf - t0);
  s.t.resize(n);
  s.values.resize(n, s.channels());
  s.derivs.resize(n, s.channels());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = grid[static_cast<size_t>(i)];
    const RVec v = f(t);
    if (v.size() != s.channels())
      throw DimensionError("sample_schedule: control record size mismatch");
    RVec d;
    if (t - t0 < h)
      d = (-2.5 * f(t + h) + 4.0 * f(t + 2.0 * h) - 1.5 * f(t + 3.0 * h)) / h;
    else if (tf - t < h)
      d = (2.5 * f(t - h) - 4.0 * f(t - 2.0 * h) + 1.5 * f(t - 3.0 * h)) / h;
    else
      d = (f(t + h) - f(t - h)) / (2.0 * h);
    s.t(i) = t;
    s.values.row(i) = v.transpose();
    s.derivs.row(i) = d.transpose();
  }
  s.clamp_mask.assign(static_cast<size_t>(n), 0);
  s.nonphysical_mask.assign(static_cast<size_t>(n), 0);
  s.validate();
  return s;
}

}  // namespace oqs
