// oqsynth: tests for schedules, grids, CSV output, and schedule-driven
// propagation.
//
// Copyright (c) 2026 the oqsynth contributors
// SPDX-License-Identifier: MIT

#include <catch_amalgamated.hpp>

#include <oqsynth/schedule.hpp>

#include <fstream>
#include <sstream>

using namespace oqs;

namespace {

Schedule sampled(const std::function<double(double)>& f,
                 const std::function<double(double)>& df, double t0, double tf, int n) {
  Schedule s;
  s.names = {"u"};
  s.t.resize(n);
  s.values.resize(n, 1);
  s.derivs.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (tf - t0) * i / double(n - 1);
    s.t(i) = t;
    s.values(i, 0) = f(t);
    s.derivs(i, 0) = df(t);
  }
  s.validate();
  return s;
}

}  // namespace

TEST_CASE("hermite evaluation is exact on cubics") {
  auto f = [](double t) { return t * t * t - 2.0 * t + 1.0; };
  auto df = [](double t) { return 3.0 * t * t - 2.0; };
  Schedule s = sampled(f, df, 0.0, 4.0, 5);
  for (int i = 0; i <= 100; ++i) {
    const double t = 4.0 * i / 100.0;
    REQUIRE(s.at(t, 0) == Catch::Approx(f(t)).margin(1e-12));
    REQUIRE(s.deriv_at(t)(0) == Catch::Approx(df(t)).margin(1e-11));
  }
}

TEST_CASE("hermite error on smooth signals scales as the fourth power") {
  auto f = [](double t) { return std::sin(t); };
  auto df = [](double t) { return std::cos(t); };
  Schedule s = sampled(f, df, 0.0, 6.0, 101);
  double worst = 0.0, worst_d = 0.0;
  for (int i = 0; i <= 3000; ++i) {
    const double t = 6.0 * i / 3000.0;
    worst = std::max(worst, std::abs(s.at(t, 0) - f(t)));
    worst_d = std::max(worst_d, std::abs(s.deriv_at(t)(0) - df(t)));
  }
  REQUIRE(worst <= 1e-7);
  REQUIRE(worst_d <= 1e-5);
}

TEST_CASE("schedule rejects evaluation outside its span and bad shapes") {
  Schedule s = sampled([](double t) { return t; }, [](double) { return 1.0; }, 0.0, 1.0, 3);
  REQUIRE_THROWS_AS(s.at(1.5), ScheduleGapError);
  REQUIRE_THROWS_AS(s.at(-0.5), ScheduleGapError);
  REQUIRE_NOTHROW(s.at(0.0));
  REQUIRE_NOTHROW(s.at(1.0));
  REQUIRE(s.channel("u") == 0);
  REQUIRE_THROWS_AS(s.channel("v"), Error);

  Schedule bad = s;
  bad.t(2) = bad.t(1);  // not strictly increasing
  REQUIRE_THROWS_AS(bad.validate(), Error);
  Schedule bad2 = s;
  bad2.values.resize(2, 1);
  REQUIRE_THROWS_AS(bad2.validate(), DimensionError);
}

TEST_CASE("clamp bookkeeping") {
  Schedule s = sampled([](double t) { return t; }, [](double) { return 1.0; }, 0.0, 1.0, 4);
  s.clamp_mask = {0, 1, 1, 0};
  s.nonphysical_mask = {0, 0, 0, 2};
  s.validate();
  REQUIRE(s.clamp_fraction() == Catch::Approx(0.5));
  REQUIRE(s.any_nonphysical());
}

TEST_CASE("refined grid covers endpoints, edges, and clusters") {
  auto g = refined_grid(0.0, 2.0, 101, {{1.3, 0.05, 12}});
  REQUIRE(g.front() == 0.0);
  REQUIRE(g.back() == 2.0);
  for (size_t i = 1; i < g.size(); ++i) REQUIRE(g[i] > g[i - 1]);
  // Geometric edge refinement reaches down to 1e-8 of the span.
  REQUIRE(g[1] <= 0.0 + 1e-7 * 2.0);
  REQUIRE(g[g.size() - 2] >= 2.0 - 1e-7 * 2.0);
  // Cluster points approach the requested center from both sides.
  int near = 0;
  for (double v : g)
    if (std::abs(v - 1.3) < 0.05 && std::abs(v - 1.3) > 0.0) ++near;
  REQUIRE(near >= 12);
}

TEST_CASE("csv output is deterministic and atomic") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "oqsynth_test_csv";
  fs::remove_all(dir);
  const fs::path p = dir / "table.csv";
  std::vector<RVec> rows;
  for (int i = 0; i < 3; ++i) {
    RVec r(2);
    r << i * 0.1, std::sqrt(2.0) * i;
    rows.push_back(r);
  }
  csv::write_table(p, {"time", "x"}, rows);
  REQUIRE(fs::exists(p));
  REQUIRE_FALSE(fs::exists(p.string() + ".tmp"));
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string first = ss.str();
  REQUIRE(first.substr(0, 7) == "time,x\n");
  REQUIRE(first.find("1.000000000000e-01") != std::string::npos);
  // Re-writing the same data produces the identical byte stream.
  csv::write_table(p, {"time", "x"}, rows);
  std::ifstream f2(p);
  std::stringstream ss2;
  ss2 << f2.rdbuf();
  REQUIRE(ss2.str() == first);
  fs::remove_all(dir);
}

TEST_CASE("schedule csv includes derivatives and flags") {
  namespace fs = std::filesystem;
  Schedule s = sampled([](double t) { return 2.0 * t; }, [](double) { return 2.0; }, 0.0,
                       1.0, 3);
  s.clamp_mask = {0, 1, 0};
  s.nonphysical_mask = {0, 0, 0};
  const fs::path p = fs::temp_directory_path() / "oqsynth_sched.csv";
  write_schedule_csv(s, p);
  std::ifstream f(p);
  std::string header;
  std::getline(f, header);
  REQUIRE(header == "time,u,d_u,clamped,nonphysical");
  fs::remove(p);
}

TEST_CASE("schedule-driven propagation matches a constant generator") {
  LindbladModel m;
  m.dim = 2;
  m.hamiltonian = [](const RVec& c) {
    Mat h(2, 2);
    h << 0.0, 0.5 * c(0), 0.5 * c(0), 0.0;
    return h;
  };
  Mat sm = Mat::Zero(2, 2);
  sm(1, 0) = 1.0;
  m.channels = {{sm, 1.3, 0.1}};

  Schedule s = sampled([](double) { return 0.9; }, [](double) { return 0.0; }, 0.0, 3.0, 5);
  Mat rho0 = Mat::Zero(2, 2);
  rho0(0, 0) = 1.0;
  auto res = propagate(m, s, rho0, 0.0, 3.0);

  Mat h(2, 2);
  h << 0.0, 0.45, 0.45, 0.0;
  Mat l = assemble_liouvillian(h, {{sm, 1.3, 0.1}});
  auto ref = propagate([&](double) { return l; }, rho0, 0.0, 3.0);
  REQUIRE((res.final_state() - ref.final_state()).cwiseAbs().maxCoeff() <= 1e-9);

  REQUIRE_THROWS_AS(propagate(m, s, rho0, 0.0, 4.0), ScheduleGapError);
}
