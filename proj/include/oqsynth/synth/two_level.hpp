// oqsynth: control synthesis for the driven dissipative two-level system.
//
// Conventions: H(Omega, Delta) = (Omega/2) sx + (Delta/2) sz, the thermal
// channel lowers into basis state 1, and the Bloch vector obeys
//   rx' = -Delta ry - (gt/2) rx
//   ry' =  Delta rx - Omega rz - (gt/2) ry
//   rz' =  Omega ry - gt rz - gamma,      gt = (2N+1) gamma.
// Internally the synthesis works with half-strength controls (om, de) =
// (Omega, Delta) / 2; every emitted record is in the public frame above.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/blochsu.hpp>
#include <oqsynth/protocol.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

namespace oqs::two_level {

struct Params {
  double gamma = 1.0;  // emission rate into the environment
  double n0 = 0.0;     // ambient occupation of the bath
};

// Control record layout shared by every two-level protocol.
inline const std::vector<std::string>& channel_names() {
  static const std::vector<std::string> names{"Omega", "Delta", "N"};
  return names;
}

inline LindbladModel model(const Params& p) {
  LindbladModel m;
  m.dim = 2;
  m.hamiltonian = [](const RVec& c) {
    Mat h(2, 2);
    h << 0.5 * c(1), 0.5 * c(0), 0.5 * c(0), -0.5 * c(1);
    return h;
  };
  Mat lower = Mat::Zero(2, 2);
  lower(1, 0) = 1.0;
  m.channels.push_back({lower, p.gamma, p.n0, 2});
  return m;
}

// Monotone switch shapes on [0, 1]. The settle variants approach 1 with a
// high-order tangency, which keeps the terminal coherence budget of the
// purification protocols small.
enum class ShapeKind { smoothstep3, smoothstep5, settle5, settle6 };

struct ShapeVal {
  double s;
  double ds;  // derivative with respect to u
};

inline ShapeVal shape_eval(ShapeKind k, double u) {
  u = std::clamp(u, 0.0, 1.0);
  const double w = 1.0 - u;
  switch (k) {
    case ShapeKind::smoothstep3:
      return {u * u * (3.0 - 2.0 * u), 6.0 * u * w};
    case ShapeKind::smoothstep5:
      return {u * u * u * (10.0 - 15.0 * u + 6.0 * u * u), 30.0 * u * u * w * w};
    case ShapeKind::settle5:
      return {1.0 - w * w * w * w * w * (1.0 + 5.0 * u), 30.0 * u * w * w * w * w};
    case ShapeKind::settle6:
      return {1.0 - w * w * w * w * w * w * (1.0 + 6.0 * u), 42.0 * u * w * w * w * w * w};
  }
  throw Error("shape_eval: unknown shape");
}

struct PathPoint {
  double v;
  double dv;  // derivative with respect to t
};

inline PathPoint shaped_path(double a, double b, double t, double tdur, ShapeKind k) {
  const ShapeVal sv = shape_eval(k, t / tdur);
  return {a + (b - a) * sv.s, (b - a) * sv.ds / tdur};
}

struct CoherentOptions {
  ShapeKind shape = ShapeKind::settle6;  // same family for both prescribed paths
  double blend_frac = 1e-3;              // handover width before the crossing, per unit tf
  double tail_frac = 1e-4;               // terminal taper width, per unit tf
  int scan_points = 40001;               // crossing-scan resolution
  double crossing_floor = 1e-12;         // budget treated as exhausted below this
  double infeasible_tol = 1e-9;          // pre-crossing negativity beyond this throws
  StepTolerances quad_tol{1e-12, 1e-16};
  int grid_points = 1201;  // emission grid base density
};

namespace detail {

// Quadrature budget y(t) with y' = -lam(t) - gt y: the squared magnitude of
// the Bloch component left free by a prescribed path. Scanned for the last
// time it sits above the floor (the handover point) and for negative
// excursions before it (infeasibility of the prescription).
struct CoherenceBudget {
  std::shared_ptr<DenseSolution<RVec>> sol;
  double t_star = 0.0;
  double raw_end = 0.0;
  double worst_pre = 0.0;
};

template <class LamFn>
CoherenceBudget solve_budget(LamFn&& lam, double gt, double y0, double tf,
                             const CoherentOptions& opt) {
  auto rhs = [&lam, gt](double t, const RVec& y) {
    RVec d(1);
    d(0) = -lam(t) - gt * y(0);
    return d;
  };
  RVec init(1);
  init(0) = y0;
  IntegrationStats st;
  CoherenceBudget out;
  out.sol = std::make_shared<DenseSolution<RVec>>(
      integrate_dopri5(rhs, init, 0.0, tf, opt.quad_tol, &st));
  out.raw_end = out.sol->eval(tf)(0);
  const int n = opt.scan_points;
  std::vector<double> samp(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    samp[static_cast<size_t>(i)] = out.sol->eval(tf * double(i) / double(n - 1))(0);
  int last_pos = -1;
  for (int i = n - 1; i >= 0; --i)
    if (samp[static_cast<size_t>(i)] > opt.crossing_floor) {
      last_pos = i;
      break;
    }
  if (last_pos <= 0)
    throw InfeasibleTrajectoryError("coherence budget never rises above the floor");
  out.t_star = tf * double(last_pos) / double(n - 1);
  for (int i = 0; i < last_pos; ++i) out.worst_pre = std::min(out.worst_pre, samp[static_cast<size_t>(i)]);
  if (out.worst_pre < -opt.infeasible_tol)
    throw InfeasibleTrajectoryError("prescribed path needs negative squared coherence (min " +
                                    std::to_string(out.worst_pre) + ")");
  return out;
}

// Replace the last tail_frac of the duration with a cubic ease-out from the
// control record at the tail start to the rest record, so every channel
// lands exactly on its declared terminal value.
inline ControlFn with_terminal_taper(ControlFn inner, double tf, double tail_frac,
                                     const RVec& rest) {
  const double te = tf * (1.0 - tail_frac);
  const RVec ce = inner(te);
  return [inner = std::move(inner), tf, te, ce, rest](double t) -> RVec {
    if (t <= te) return inner(t);
    const double u = std::clamp((t - te) / (tf - te), 0.0, 1.0);
    const double s = 1.0 - shape_eval(ShapeKind::smoothstep3, u).s;
    return rest + (ce - rest) * s;
  };
}

inline std::vector<GridCluster> protocol_clusters(double t_star, double delta, double tf,
                                                  double tail_frac) {
  const double te = tf * (1.0 - tail_frac);
  return {{t_star, 4.0 * delta, 16}, {0.5 * (te + tf), 0.5 * (tf - te), 12}};
}

}  // namespace detail

struct PurificationResult {
  Protocol protocol;
  double handover_time = 0.0;   // where the coherence budget crosses the floor
  double raw_budget_end = 0.0;  // unclamped budget at tf (sets the protocol defect)
};

// Purification with both quadratures driven: prescribe (ry, rz) switch
// paths from the steady state at om0_init to the south pole, solve the
// rx^2 budget, and back out (Omega, Delta) from the inverse dynamics.
// After the budget is exhausted the law hands over to the rx = 0 branch
// through a short quintic blend.
inline PurificationResult detuned_purification_protocol(const Params& p, double om0_init,
                                                        double tf,
                                                        const CoherentOptions& opt = {}) {
  const double ga = p.gamma, w = 2.0 * p.n0 + 1.0, gt = w * ga;
  const Eigen::Vector3d r0 = two_level_steady_bloch(om0_init, ga, p.n0);
  const double ry0 = r0(1), rz0 = r0(2);
  const ShapeKind sk = opt.shape;
  auto fy = [ry0, tf, sk](double t) { return shaped_path(ry0, 0.0, t, tf, sk); };
  auto fz = [rz0, tf, sk](double t) { return shaped_path(rz0, -1.0, t, tf, sk); };
  auto lam = [=](double t) {
    const auto [ry, dry] = fy(t);
    const auto [rz, drz] = fz(t);
    return gt * ry * ry + 2.0 * ga * rz * (w * rz + 1.0) + 2.0 * ry * dry + 2.0 * rz * drz;
  };
  const auto budget = detail::solve_budget(lam, gt, 0.0, tf, opt);
  const auto xsol = budget.sol;
  const double t_star = budget.t_star;
  const double delta = std::min(opt.blend_frac * tf, t_star);

  auto full = [=](double t) {
    const auto [ry, dry] = fy(t);
    const auto [rz, drz] = fz(t);
    const double x2 = std::max(xsol->eval(t)(0), 0.0);
    const double dx2 = -lam(t) - gt * x2;
    const double rx = std::sqrt(x2);
    const double drx = rx > 1e-14 ? dx2 / (2.0 * rx) : 0.0;
    const double r2 = x2 + ry * ry + rz * rz;
    const double den = 2.0 * ry * (r2 + rz * rz);
    if (std::abs(den) < 1e-300) return std::pair{0.0, 0.0};
    const double om =
        (ga * (x2 + ry * ry) - rz * (dx2 + 2.0 * ry * dry) + (x2 + ry * ry) * drz) / den;
    const double de =
        (rx * (ry * dry + rz * drz) - drx * (ry * ry + 2.0 * rz * rz) + ga * rx * rz) / den;
    return std::pair{om, de};
  };
  // rx = 0 branch of the same inversion, with the common factor ry cancelled.
  auto reduced = [=](double t) {
    const auto [ry, dry] = fy(t);
    const auto [rz, drz] = fz(t);
    if (ry < 1e-14) return std::pair{0.0, 0.0};
    const double om =
        (ga * ry - 2.0 * rz * dry + ry * drz) / (2.0 * (ry * ry + 2.0 * rz * rz));
    return std::pair{om, 0.0};
  };
  const auto [oa, da] = full(t_star - delta);
  const auto [ob, db] = reduced(t_star);
  auto law = [=](double t) {
    if (t <= t_star - delta) return full(t);
    if (t <= t_star) {
      const double u = std::clamp((t - (t_star - delta)) / delta, 0.0, 1.0);
      const double b = shape_eval(ShapeKind::smoothstep5, u).s;
      return std::pair{oa + (ob - oa) * b, da + (db - da) * b};
    }
    return reduced(t);
  };
  const double n0 = p.n0;
  ControlFn inner = [law, n0](double t) -> RVec {
    const auto [om, de] = law(t);
    RVec c(3);
    c << 2.0 * om, 2.0 * de, n0;
    return c;
  };
  RVec rest(3);
  rest << 0.0, 0.0, n0;

  PurificationResult out;
  out.handover_time = t_star;
  out.raw_budget_end = budget.raw_end;
  Protocol& pr = out.protocol;
  pr.model = model(p);
  pr.control_fn = detail::with_terminal_taper(std::move(inner), tf, opt.tail_frac, rest);
  pr.schedule = sample_schedule(
      pr.control_fn, channel_names(),
      refined_grid(0.0, tf, opt.grid_points,
                   detail::protocol_clusters(t_star, delta, tf, opt.tail_frac)));
  pr.rho0 = from_bloch(RVec(r0), 2);
  RVec south(3);
  south << 0.0, 0.0, -1.0;
  pr.target = from_bloch(south, 2);
  pr.boundary_start = RVec(3);
  pr.boundary_start << om0_init, 0.0, n0;
  pr.boundary_end = rest;
  pr.ref_state_fn = [fy, fz](double t) {
    RVec r(3);
    r << 0.0, fy(t).v, fz(t).v;
    return from_bloch(r, 2);
  };
  pr.t0 = 0.0;
  pr.tf = tf;
  return out;
}

// Purification on resonance: only rz is prescribed, ry carries the budget,
// and the detuning channel is identically zero.
inline PurificationResult resonant_purification_protocol(const Params& p, double om0_init,
                                                         double tf,
                                                         const CoherentOptions& opt = {}) {
  const double ga = p.gamma, w = 2.0 * p.n0 + 1.0, gt = w * ga;
  const Eigen::Vector3d r0 = two_level_steady_bloch(om0_init, ga, p.n0);
  const double ry0 = r0(1), rz0 = r0(2);
  const ShapeKind sk = opt.shape;
  auto fz = [rz0, tf, sk](double t) { return shaped_path(rz0, -1.0, t, tf, sk); };
  auto lam = [=](double t) {
    const auto [rz, drz] = fz(t);
    return 2.0 * ga * rz * (w * rz + 1.0) + 2.0 * rz * drz;
  };
  const auto budget = detail::solve_budget(lam, gt, ry0 * ry0, tf, opt);
  const auto ysol = budget.sol;
  const double t_star = budget.t_star;
  const double delta = std::min(opt.blend_frac * tf, t_star);

  auto full = [=](double t) {
    const auto [rz, drz] = fz(t);
    const double y2 = std::max(ysol->eval(t)(0), 0.0);
    const double dy2 = -lam(t) - gt * y2;
    const double ry = std::sqrt(y2);
    if (ry < 1e-14) return 0.0;
    return (ga * y2 - rz * dy2 + y2 * drz) / (2.0 * ry * (y2 + 2.0 * rz * rz));
  };
  const double oa = full(t_star - delta);
  auto law = [=](double t) {
    if (t <= t_star - delta) return full(t);
    if (t <= t_star) {
      const double u = std::clamp((t - (t_star - delta)) / delta, 0.0, 1.0);
      return oa * (1.0 - shape_eval(ShapeKind::smoothstep5, u).s);
    }
    return 0.0;
  };
  const double n0 = p.n0;
  ControlFn inner = [law, n0](double t) -> RVec {
    RVec c(3);
    c << 2.0 * law(t), 0.0, n0;
    return c;
  };
  RVec rest(3);
  rest << 0.0, 0.0, n0;

  PurificationResult out;
  out.handover_time = t_star;
  out.raw_budget_end = budget.raw_end;
  Protocol& pr = out.protocol;
  pr.model = model(p);
  pr.control_fn = detail::with_terminal_taper(std::move(inner), tf, opt.tail_frac, rest);
  pr.schedule = sample_schedule(
      pr.control_fn, channel_names(),
      refined_grid(0.0, tf, opt.grid_points,
                   detail::protocol_clusters(t_star, delta, tf, opt.tail_frac)));
  pr.rho0 = from_bloch(RVec(r0), 2);
  RVec south(3);
  south << 0.0, 0.0, -1.0;
  pr.target = from_bloch(south, 2);
  pr.boundary_start = RVec(3);
  pr.boundary_start << om0_init, 0.0, n0;
  pr.boundary_end = rest;
  pr.ref_state_fn = [ysol, fz](double t) {
    RVec r(3);
    r << 0.0, std::sqrt(std::max(ysol->eval(t)(0), 0.0)), fz(t).v;
    return from_bloch(r, 2);
  };
  pr.t0 = 0.0;
  pr.tf = tf;
  return out;
}

struct TrackingOptions {
  ShapeKind ramp_shape = ShapeKind::smoothstep3;
  double tail_frac = 1e-4;
  int grid_points = 1201;
};

// Inverse engineering along the instantaneous steady-state path of a bare
// Rabi ramp om_c -> 0: the drive is corrected and the bath occupation is
// steered so the steady state of the ramp is followed exactly at any speed.
inline Protocol steady_tracking_protocol(const Params& p, double om_c, double tf,
                                         const TrackingOptions& opt = {}) {
  const double ga = p.gamma, w = 2.0 * p.n0 + 1.0, n0 = p.n0;
  const ShapeKind rk = opt.ramp_shape;
  auto ramp = [om_c, tf, rk](double t) { return shaped_path(om_c, 0.0, t, tf, rk); };
  auto steady_r = [ga, w, ramp](double t) {
    const double x = ramp(t).v / ga;
    const double pq = w * w + 2.0 * x * x;
    RVec r(3);
    r << 0.0, 2.0 * x / pq, -w / pq;
    return r;
  };
  ControlFn inner = [=](double t) -> RVec {
    const auto [om0, dom0] = ramp(t);
    const double x = om0 / ga, dx = dom0 / ga;
    const double pq = w * w + 2.0 * x * x;
    const double ry = 2.0 * x / pq, rz = -w / pq;
    const double dp = 4.0 * x * dx;
    const double dry = 2.0 * dx / pq - 2.0 * x * dp / (pq * pq);
    const double drz = w * dp / (pq * pq);
    const double r2 = ry * ry + rz * rz;
    const double dr2 = 2.0 * (ry * dry + rz * drz);
    const double den = 2.0 * ry * (r2 + rz * rz);
    RVec c(3);
    if (std::abs(den) < 1e-30) {
      c << 0.0, 0.0, n0;
      return c;
    }
    const double om = (ga * ry * ry - rz * (2.0 * ry * dry) + ry * ry * drz) / den;
    const double nt = -(0.5 + rz / (r2 + rz * rz) + dr2 / (2.0 * ga * (r2 + rz * rz)));
    c << 2.0 * om, 0.0, nt;
    return c;
  };
  RVec rest(3);
  rest << 0.0, 0.0, n0;

  Protocol pr;
  pr.model = model(p);
  pr.control_fn = detail::with_terminal_taper(std::move(inner), tf, opt.tail_frac, rest);
  const double te = tf * (1.0 - opt.tail_frac);
  pr.schedule = sample_schedule(
      pr.control_fn, channel_names(),
      refined_grid(0.0, tf, opt.grid_points, {{0.5 * (te + tf), 0.5 * (tf - te), 12}}));
  pr.rho0 = from_bloch(steady_r(0.0), 2);
  RVec thermal_south(3);
  thermal_south << 0.0, 0.0, -1.0 / w;
  pr.target = from_bloch(thermal_south, 2);
  pr.boundary_start = RVec(3);
  pr.boundary_start << om_c, 0.0, n0;
  pr.boundary_end = rest;
  pr.ref_state_fn = [steady_r](double t) { return from_bloch(steady_r(t), 2); };
  pr.t0 = 0.0;
  pr.tf = tf;
  // Flag grid rows where the steered occupation is negative: the tracking
  // stays exact, but such a bath cannot be realized thermally.
  const int nch = pr.schedule.channel("N");
  for (Eigen::Index i = 0; i < pr.schedule.rows(); ++i)
    if (pr.schedule.values(i, nch) < 0.0)
      pr.schedule.nonphysical_mask[static_cast<size_t>(i)] |= 1u << nch;
  return pr;
}

// The same bare ramp without any correction, for adiabatic comparison runs.
inline Protocol bare_ramp_reference(const Params& p, double om_c, double tf,
                                    ShapeKind ramp_shape = ShapeKind::smoothstep3) {
  const double ga = p.gamma, w = 2.0 * p.n0 + 1.0, n0 = p.n0;
  auto ramp = [om_c, tf, ramp_shape](double t) {
    return shaped_path(om_c, 0.0, t, tf, ramp_shape);
  };
  auto steady_r = [ga, w, ramp](double t) {
    const double x = ramp(t).v / ga;
    const double pq = w * w + 2.0 * x * x;
    RVec r(3);
    r << 0.0, 2.0 * x / pq, -w / pq;
    return r;
  };
  Protocol pr;
  pr.model = model(p);
  pr.control_fn = [ramp, n0](double t) -> RVec {
    RVec c(3);
    c << ramp(t).v, 0.0, n0;
    return c;
  };
  pr.schedule =
      sample_schedule(pr.control_fn, channel_names(), refined_grid(0.0, tf, 801));
  pr.rho0 = from_bloch(steady_r(0.0), 2);
  RVec thermal_south(3);
  thermal_south << 0.0, 0.0, -1.0 / w;
  pr.target = from_bloch(thermal_south, 2);
  pr.boundary_start = RVec(3);
  pr.boundary_start << om_c, 0.0, n0;
  pr.boundary_end = RVec(3);
  pr.boundary_end << 0.0, 0.0, n0;
  pr.ref_state_fn = [steady_r](double t) { return from_bloch(steady_r(t), 2); };
  pr.t0 = 0.0;
  pr.tf = tf;
  return pr;
}

struct FinalTimeScan {
  bool feasible_lo = false;
  bool feasible_hi = false;
  bool root_found = false;  // a feasibility transition was bracketed and bisected
  double t_min = 0.0;       // smallest feasible duration established by the scan
};

// Bisect the protocol duration for the detuned purification prescription.
// With the shipped switch shapes the budget stays nonnegative for every
// duration, so the scan typically reports feasibility down to t_lo with no
// root in between.
inline FinalTimeScan scan_final_time(const Params& p, double om0_init, double t_lo,
                                     double t_hi, const CoherentOptions& opt = {},
                                     int iters = 48) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw Error("scan_final_time: bad bracket");
  const double ga = p.gamma, w = 2.0 * p.n0 + 1.0, gt = w * ga;
  const Eigen::Vector3d r0 = two_level_steady_bloch(om0_init, ga, p.n0);
  auto feasible = [&](double tdur) {
    auto fy = [&, tdur](double t) { return shaped_path(r0(1), 0.0, t, tdur, opt.shape); };
    auto fz = [&, tdur](double t) { return shaped_path(r0(2), -1.0, t, tdur, opt.shape); };
    auto lam = [&](double t) {
      const auto [ry, dry] = fy(t);
      const auto [rz, drz] = fz(t);
      return gt * ry * ry + 2.0 * ga * rz * (w * rz + 1.0) + 2.0 * ry * dry +
             2.0 * rz * drz;
    };
    try {
      detail::solve_budget(lam, gt, 0.0, tdur, opt);
      return true;
    } catch (const InfeasibleTrajectoryError&) {
      return false;
    }
  };
  FinalTimeScan out;
  out.feasible_lo = feasible(t_lo);
  out.feasible_hi = feasible(t_hi);
  if (out.feasible_lo) {
    out.t_min = t_lo;
    return out;
  }
  if (!out.feasible_hi) {
    out.t_min = t_hi;
    return out;
  }
  double lo = t_lo, hi = t_hi;
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  out.root_found = true;
  out.t_min = hi;
  return out;
}

}  // namespace oqs::two_level
