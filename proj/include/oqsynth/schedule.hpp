// oqsynth: sampled control schedules with derivative storage, refined time
// grids, deterministic CSV output, and schedule-driven propagation.
//
// A Schedule stores per-channel values and time derivatives on a strictly
// increasing grid; evaluation between samples is cubic Hermite, so the
// stored derivatives are part of the artifact rather than a re-derived
// quantity. Per-sample flag masks record cutoff clamping and requested
// non-physical values (one bit per channel).
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#pragma once

#include <oqsynth/lindblad.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace oqs {

struct ScheduleGapError : Error {
  using Error::Error;
};

class Schedule {
 public:
  std::vector<std::string> names;
  RVec t;
  RMat values;  // rows = grid times, cols = channels
  RMat derivs;  // same shape
  std::vector<uint32_t> clamp_mask;        // bit k set: channel k clamped at this row
  std::vector<uint32_t> nonphysical_mask;  // bit k set: channel k non-physical here

  double t0() const { return t(0); }
  double tf() const { return t(t.size() - 1); }
  Eigen::Index rows() const { return t.size(); }
  Eigen::Index channels() const { return static_cast<Eigen::Index>(names.size()); }

  int channel(const std::string& name) const {
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return static_cast<int>(k);
    throw Error("schedule has no channel named '" + name + "'");
  }

  void validate() const {
    if (t.size() < 2) throw Error("schedule needs at least two samples");
    if (values.rows() != t.size() || derivs.rows() != t.size() ||
        values.cols() != channels() || derivs.cols() != channels())
      throw DimensionError("schedule arrays are inconsistent");
    for (Eigen::Index i = 1; i < t.size(); ++i)
      if (!(t(i) > t(i - 1))) throw Error("schedule grid is not strictly increasing");
    if (!clamp_mask.empty() && clamp_mask.size() != static_cast<size_t>(t.size()))
      throw DimensionError("clamp mask length mismatch");
    if (!nonphysical_mask.empty() &&
        nonphysical_mask.size() != static_cast<size_t>(t.size()))
      throw DimensionError("nonphysical mask length mismatch");
  }

  RVec at(double tau) const {
    const auto [i, u, h] = locate(tau);
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * values.row(i).transpose() + (h10 * h) * derivs.row(i).transpose() +
           h01 * values.row(i + 1).transpose() + (h11 * h) * derivs.row(i + 1).transpose();
  }

  RVec deriv_at(double tau) const {
    const auto [i, u, h] = locate(tau);
    const double u2 = u * u;
    const double d00 = (6 * u2 - 6 * u) / h, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = (-6 * u2 + 6 * u) / h, d11 = 3 * u2 - 2 * u;
    return d00 * values.row(i).transpose() + d10 * derivs.row(i).transpose() +
           d01 * values.row(i + 1).transpose() + d11 * derivs.row(i + 1).transpose();
  }

  double at(double tau, int ch) const { return at(tau)(ch); }

  // Fraction of grid rows carrying at least one clamp bit.
  double clamp_fraction() const {
    if (clamp_mask.empty()) return 0.0;
    std::size_t n = 0;
    for (uint32_t m : clamp_mask) n += (m != 0);
    return double(n) / double(clamp_mask.size());
  }

  bool any_nonphysical() const {
    for (uint32_t m : nonphysical_mask)
      if (m) return true;
    return false;
  }

 private:
  std::tuple<Eigen::Index, double, double> locate(double tau) const {
    const double span = tf() - t0();
    if (tau < t0() - 1e-9 * span || tau > tf() + 1e-9 * span)
      throw ScheduleGapError("schedule evaluated at t outside its span");
    tau = std::clamp(tau, t0(), tf());
    const double* begin = t.data();
    const double* end = begin + t.size();
    auto it = std::upper_bound(begin, end, tau);
    Eigen::Index i = std::max<Eigen::Index>(0, (it - begin) - 1);
    i = std::min(i, t.size() - 2);
    const double h = t(i + 1) - t(i);
    return {i, (tau - t(i)) / h, h};
  }
};

// Uniform base grid of n points plus geometric refinement toward both ends
// (synthesized controls often vary fastest near the boundaries) and optional
// extra clusters around interior features.
struct GridCluster {
  double center = 0.0;
  double halfwidth = 0.0;
  int points = 0;  // per side
};

inline std::vector<double> refined_grid(double t0, double tf, int n_base,
                                        const std::vector<GridCluster>& clusters = {},
                                        int edge_points = 24) {
  const double span = tf - t0;
  std::vector<double> g;
  g.reserve(n_base + 4 * edge_points + 64);
  for (int i = 0; i < n_base; ++i) g.push_back(t0 + span * double(i) / double(n_base - 1));
  // Geometric ladders from 1e-8 span to 2e-2 span at each end.
  const double lo = 1e-8, hi = 2e-2;
  for (int k = 0; k < edge_points; ++k) {
    const double f = lo * std::pow(hi / lo, double(k) / double(edge_points - 1));
    g.push_back(t0 + f * span);
    g.push_back(tf - f * span);
  }
  for (const auto& c : clusters) {
    for (int k = 0; k < c.points; ++k) {
      const double f =
          1e-6 * std::pow(1.0 / 1e-6, double(k) / std::max(1, c.points - 1));
      const double off = c.halfwidth * f;
      if (c.center + off < tf) g.push_back(std::clamp(c.center + off, t0, tf));
      if (c.center - off > t0) g.push_back(std::clamp(c.center - off, t0, tf));
    }
  }
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  out.reserve(g.size());
  const double min_sep = 1e-12 * span;
  for (double v : g)
    if (out.empty() || v - out.back() > min_sep) out.push_back(v);
  out.front() = t0;
  out.back() = tf;
  return out;
}

namespace csv {

inline std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// Deterministic CSV: header row, one data row per time, '.' decimal
// separator, '\n' line ends. The file is written to a temporary sibling and
// renamed into place so concurrent sweep workers never expose partial rows.
inline void write_table(const std::filesystem::path& path,
                        const std::vector<std::string>& header,
                        const std::vector<RVec>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + tmp.string() + "' for writing");
    for (size_t k = 0; k < header.size(); ++k)
      f << (k ? "," : "") << header[k];
    f << '\n';
    for (const auto& r : rows) {
      for (Eigen::Index k = 0; k < r.size(); ++k)
        f << (k ? "," : "") << format(r(k));
      f << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace csv

// Write the schedule itself: time, channel values, channel derivatives,
// and the two flag masks.
inline void write_schedule_csv(const Schedule& s, const std::filesystem::path& path) {
  std::vector<std::string> header{"time"};
  for (const auto& n : s.names) header.push_back(n);
  for (const auto& n : s.names) header.push_back("d_" + n);
  header.push_back("clamped");
  header.push_back("nonphysical");
  std::vector<RVec> rows;
  rows.reserve(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    RVec r(1 + 2 * s.channels() + 2);
    r(0) = s.t(i);
    r.segment(1, s.channels()) = s.values.row(i);
    r.segment(1 + s.channels(), s.channels()) = s.derivs.row(i);
    r(1 + 2 * s.channels()) = s.clamp_mask.empty() ? 0.0 : double(s.clamp_mask[i]);
    r(2 + 2 * s.channels()) =
        s.nonphysical_mask.empty() ? 0.0 : double(s.nonphysical_mask[i]);
    rows.push_back(std::move(r));
  }
  csv::write_table(path, header, rows);
}

// Master-equation propagation driven by a schedule: the control record at
// each instant is the Hermite-interpolated schedule row.
inline PropagationResult propagate(const LindbladModel& model, const Schedule& sch,
                                   const Mat& rho0, double t0, double tf,
                                   const PropagationOptions& opt = {}) {
  const double span = sch.tf() - sch.t0();
  if (t0 < sch.t0() - 1e-9 * span || tf > sch.tf() + 1e-9 * span)
    throw ScheduleGapError("propagate: schedule does not cover the requested span");
  auto rhs = [&](double t, const CVec& y) -> CVec {
    return liouvillian_at(model, sch.at(t)) * y;
  };
  return propagate_rhs(rhs, rho0, t0, tf, opt);
}

}  // namespace oqs
