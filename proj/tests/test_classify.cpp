#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "fixtures.hpp"
#include "thread5d/classify.hpp"

using namespace thread5d;
using namespace thread5d::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

Trajectory leaf_trajectory(const ThreadedMetric& m, double x0_start, double t1) {
  GeodesicState s0;
  s0.point = {x0_start, 0.0, 0.0, 0.0, 5.0};
  s0.vel = AdaptedVelocity{0.0, {0.3, 0.2, 0.1}, 0.0};
  return integrate(m, s0, 0.0, t1, {});
}

} // namespace

TEST_CASE("spatial curve detection thresholds on the velocity scale") {
  const ThreadedMetric m = rw_leaf_metric();
  const Trajectory on = leaf_trajectory(m, 2.0, 0.2);
  const SpatialCheck sc = is_spatial_curve(on, 1e-8);
  CHECK(sc.is_spatial);
  CHECK(sc.speed_scale == doctest::Approx(0.3));
  CHECK(sc.threshold == doctest::Approx(1.3e-8));

  GeodesicState s0{Point5{2.0, 0.0, 0.0, 0.0, 5.0},
                   AdaptedVelocity{0.5, {0.3, 0.0, 0.0}, 0.0}};
  const Trajectory timelike = integrate(m, s0, 0.0, 0.2, {});
  CHECK_FALSE(is_spatial_curve(timelike, 1e-8).is_spatial);
}

TEST_CASE("leaf launch classifies as a spatial geodesic") {
  const ThreadedMetric m = rw_leaf_metric();
  const Trajectory traj = leaf_trajectory(m, 2.0, 1.0);

  // The leaf sits at a critical point of the warping: the launch stays
  // exactly spatial and every residual vanishes identically.
  for (const auto& ts : traj.samples) {
    CHECK(std::fabs(ts.state.vel.u0) <= 1e-8);
    CHECK(std::fabs(ts.state.vel.u4) <= 1e-8);
  }

  const ClassificationReport r = classify_trajectory(m, traj, 1e-8, std::nullopt);
  CHECK(r.spatial.is_spatial);
  CHECK(r.autoparallel);
  CHECK(r.theta_null);
  CHECK(r.kappa_null);
  CHECK(r.spatial_geodesic);
  CHECK(r.residuals.res_a <= 1e-7);
  CHECK(r.residuals.res_b <= 1e-7);
  CHECK(r.residuals.res_c <= 1e-7);
  CHECK(r.samples == traj.samples.size());
  CHECK_FALSE(r.bundle.has_value());
}

TEST_CASE("off-leaf launch fails the expansion residual") {
  const ThreadedMetric m = rw_leaf_metric();
  const Trajectory traj = leaf_trajectory(m, 2.1, 1.0);
  const ClassificationReport r = classify_trajectory(m, traj, 1e-8, std::nullopt);
  CHECK(r.residuals.res_b > 1e-3);
  CHECK_FALSE(r.theta_null);
  CHECK_FALSE(r.spatial_geodesic);
}

TEST_CASE("external trajectories are differenced, not re-derived") {
  const ThreadedMetric m = rw_leaf_metric();
  const Trajectory traj = leaf_trajectory(m, 2.0, 0.5);

  std::stringstream ss;
  write_trajectory_csv(ss, traj);
  const Trajectory ext = read_trajectory_csv(ss);
  REQUIRE(ext.meta.kind == RhsKind::External);

  const SpatialResiduals res = spatial_geodesic_residuals(m, ext);
  // 4th-order interior stencil: two samples lost at each end.
  CHECK(res.samples_used == ext.samples.size() - 4);
  CHECK(res.res_a < 1e-8);
  CHECK(res.res_b <= 1e-10);
  CHECK(res.res_c <= 1e-10);

  const ClassificationReport r = classify_trajectory(m, ext, 1e-8, std::nullopt);
  CHECK(r.spatial_geodesic);
}

TEST_CASE("external differencing demands enough uniform samples") {
  const ThreadedMetric m = rw_leaf_metric();
  Trajectory tiny;
  tiny.meta.kind = RhsKind::External;
  for (int i = 0; i < 3; ++i) {
    TrajectorySample ts;
    ts.t = 0.1 * i;
    ts.state.point = {2.0, 0.0, 0.0, 0.0, 5.0};
    tiny.samples.push_back(ts);
  }
  CHECK_THROWS_WITH_AS(spatial_geodesic_residuals(m, tiny),
                       doctest::Contains("at least 5 samples"), ConfigError);

  Trajectory ragged = tiny;
  for (int i = 3; i < 6; ++i) {
    TrajectorySample ts;
    ts.t = 0.1 * i + (i == 4 ? 0.03 : 0.0);
    ts.state.point = {2.0, 0.0, 0.0, 0.0, 5.0};
    ragged.samples.push_back(ts);
  }
  CHECK_THROWS_WITH_AS(spatial_geodesic_residuals(m, ragged),
                       doctest::Contains("uniformly spaced"), ConfigError);
}

TEST_CASE("killing bundle scan certifies vanishing expansions") {
  Region5 region;
  region.min = {-1.0, -1.0, -1.0, -1.0, -1.0};
  region.max = {1.0, 1.0, 1.0, 1.0, 1.0};

  const BundleCheck flat = killing_bundle_check(minkowski_metric(), region, 1e-10);
  CHECK(flat.holds);
  CHECK(flat.theta_max == 0.0);
  CHECK(flat.nodes == 243);  // 3^5 default grid

  const BundleCheck still = killing_bundle_check(killing_metric(), region, 1e-10);
  CHECK(still.holds);
  CHECK(still.kappa_max == 0.0);

  Region5 warped;
  warped.min = {1.5, -1.0, -1.0, -1.0, 2.5};
  warped.max = {2.5, 1.0, 1.0, 1.0, 3.5};
  const BundleCheck rw = killing_bundle_check(rw_flat_metric(), warped, 1e-10);
  CHECK_FALSE(rw.holds);
  // Theta_11 = f f0 = x0 x4^2 peaks at the region corner (2.5, ..., 3.5).
  CHECK(rw.theta_max == doctest::Approx(2.5 * 3.5 * 3.5).epsilon(1e-12));
  CHECK(rw.theta_argmax[0] == doctest::Approx(2.5));
  CHECK(rw.theta_argmax[4] == doctest::Approx(3.5));
}

TEST_CASE("temporal line family on the warped product") {
  const ThreadedMetric m = rw_flat_metric();
  Region5 region;
  region.min = {1.5, -1.0, -1.0, -1.0, 2.5};
  region.max = {2.5, 1.0, 1.0, 1.0, 3.5};
  const Point5 start{2.0, 0.1, -0.2, 0.3, 3.0};
  const LineFamilyResult res =
      temporal_geodesic(m, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-3);
  REQUIRE(res.conditions_hold);
  REQUIRE(res.conditions.size() == 2);
  CHECK(res.conditions[0].name == "Phi_4 = 0");
  CHECK(res.conditions[1].name == "Phi_alpha = b_alpha");
  CHECK(res.conditions[0].max_residual == 0.0);

  // Phi = 1: x0 runs affinely, every other coordinate is frozen exactly.
  REQUIRE_FALSE(res.line.samples.empty());
  for (const auto& ts : res.line.samples) {
    CHECK(ts.state.point[0] == doctest::Approx(2.0 + ts.t).epsilon(1e-12));
    CHECK(ts.state.point[1] == 0.1);
    CHECK(ts.state.point[2] == -0.2);
    CHECK(ts.state.point[3] == 0.3);
    CHECK(ts.state.point[4] == 3.0);
    CHECK(ts.state.vel.u0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ts.norm == doctest::Approx(-1.0).epsilon(1e-12));
  }
  CHECK(res.line.meta.kind == RhsKind::External);
}

TEST_CASE("vertical line family on the warped product") {
  const ThreadedMetric m = rw_flat_metric();
  Region5 region;
  region.min = {1.5, -1.0, -1.0, -1.0, 2.5};
  region.max = {2.5, 1.0, 1.0, 1.0, 3.5};
  const Point5 start{2.0, 0.0, 0.0, 0.0, 3.0};
  const LineFamilyResult res =
      vertical_geodesic(m, region, 1e-10, start, 0.5, 0.0, 1.0, 1e-3);
  REQUIRE(res.conditions_hold);
  CHECK(res.conditions[0].name == "Psi_0 = a_0");
  CHECK(res.conditions[1].name == "Psi_alpha = c_alpha");
  for (const auto& ts : res.line.samples) {
    CHECK(ts.state.point[4] == doctest::Approx(3.0 + 0.5 * ts.t).epsilon(1e-12));
    CHECK(ts.state.point[0] == 2.0);
    CHECK(ts.state.point[1] == 0.0);
    CHECK(ts.state.vel.u4 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ts.norm == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("line families report failed conditions without constructing") {
  auto fields = [](const char* phi, const char* psi) {
    return std::map<std::string, std::string>{
        {"Phi", phi}, {"Psi", psi}, {"A0", "0"},  {"A1", "0"},  {"A2", "0"},
        {"A3", "0"},  {"B1", "0"},  {"B2", "0"},  {"B3", "0"},  {"h11", "1"},
        {"h12", "0"}, {"h13", "0"}, {"h22", "1"}, {"h23", "0"}, {"h33", "1"}};
  };
  Region5 region;
  region.min = {-0.5, -0.5, -0.5, -0.5, -0.5};
  region.max = {0.5, 0.5, 0.5, 0.5, 0.5};
  const Point5 start{};

  // Spatial lapse gradient with no matching curvature: condition (b) fails.
  const ThreadedMetric m1 =
      build_metric({MetricFamily::Custom, fields("exp(x1)", "1")});
  const LineFamilyResult r1 =
      temporal_geodesic(m1, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-2);
  CHECK_FALSE(r1.conditions_hold);
  CHECK(r1.conditions[0].holds);
  CHECK_FALSE(r1.conditions[1].holds);
  CHECK(r1.conditions[1].max_residual == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.line.samples.empty());

  // Vertical lapse dependence: condition (a) fails.
  const ThreadedMetric m2 =
      build_metric({MetricFamily::Custom, fields("exp(x4)", "1")});
  const LineFamilyResult r2 =
      temporal_geodesic(m2, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-2);
  CHECK_FALSE(r2.conditions_hold);
  CHECK_FALSE(r2.conditions[0].holds);

  // Temporal Psi drift with a0 = 0: vertical condition (a) fails.
  const ThreadedMetric m3 =
      build_metric({MetricFamily::Custom, fields("1", "exp(x0)")});
  const LineFamilyResult r3 =
      vertical_geodesic(m3, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-2);
  CHECK_FALSE(r3.conditions_hold);
  CHECK_FALSE(r3.conditions[0].holds);

  // Spatial Psi gradient with c = 0: vertical condition (b) fails.
  const ThreadedMetric m4 =
      build_metric({MetricFamily::Custom, fields("1", "exp(x2)")});
  const LineFamilyResult r4 =
      vertical_geodesic(m4, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-2);
  CHECK_FALSE(r4.conditions_hold);
  CHECK_FALSE(r4.conditions[1].holds);
}

TEST_CASE("constructed temporal line coincides with full integration") {
  std::map<std::string, std::string> f = {
      {"Phi", "exp(x0)"}, {"Psi", "1"}, {"A0", "0"},  {"A1", "0"},  {"A2", "0"},
      {"A3", "0"},        {"B1", "0"},  {"B2", "0"},  {"B3", "0"},  {"h11", "1"},
      {"h12", "0"},       {"h13", "0"}, {"h22", "1"}, {"h23", "0"}, {"h33", "1"}};
  const ThreadedMetric m = build_metric({MetricFamily::Custom, f});
  Region5 region;
  region.min = {-0.5, -0.5, -0.5, -0.5, -0.5};
  region.max = {1.0, 0.5, 0.5, 0.5, 0.5};
  const Point5 start{0.0, 0.3, -0.2, 0.1, 0.4};
  const LineFamilyResult res =
      temporal_geodesic(m, region, 1e-10, start, 1.0, 0.0, 1.0, 1e-3);
  REQUIRE(res.conditions_hold);

  const GeodesicState s0{start, AdaptedVelocity{1.0, {}, 0.0}};
  const Trajectory full = integrate(m, s0, 0.0, 1.0, {});
  REQUIRE(full.samples.size() == res.line.samples.size());
  for (std::size_t i = 0; i < full.samples.size(); ++i) {
    CHECK(full.samples[i].t == res.line.samples[i].t);
    for (int c = 0; c < 5; ++c)
      CHECK(std::fabs(full.samples[i].state.point[c] -
                      res.line.samples[i].state.point[c]) < 1e-8);
    // And the closed form: x0(t) = ln(1 + t).
    CHECK(res.line.samples[i].state.point[0] ==
          doctest::Approx(std::log1p(res.line.samples[i].t)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("critical points of the warping are found and filtered") {
  SUBCASE("isolated minimum") {
    const ThreadedMetric m = rw_leaf_metric();
    CriticalPointWindow w;
    w.min = {0.0, 3.0};
    w.max = {4.0, 7.0};
    const auto pts = rw_critical_points(m.warping(), w);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].x0 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(pts[0].x4 == doctest::Approx(5.0).epsilon(1e-10));
    CHECK(pts[0].residual <= 1e-10);
  }

  SUBCASE("window excludes the only zero") {
    CriticalPointWindow w;
    w.min = {1.0, 1.0};
    w.max = {3.0, 5.0};
    w.grid = {21, 21};
    CHECK(rw_critical_points(Expr::parse("x0*x4"), w).empty());
  }

  SUBCASE("trigonometric saddle set") {
    CriticalPointWindow w;
    w.min = {0.0, 0.0};
    w.max = {kPi, kPi};
    const auto pts = rw_critical_points(Expr::parse("sin(x0)*cos(x4)"), w);
    REQUIRE(pts.size() == 4);  // sorted by (x0, x4)
    CHECK(pts[0].x0 == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(pts[0].x4 == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(pts[1].x0 == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(pts[1].x4 == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
    CHECK(pts[2].x0 == doctest::Approx(kPi / 2).epsilon(1e-9));
    CHECK(pts[2].x4 == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(pts[3].x0 == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(pts[3].x4 == doctest::Approx(kPi / 2).epsilon(1e-9));
    for (const auto& cp : pts) CHECK(cp.residual <= 1e-10);
  }

  SUBCASE("warping must live in the (x0, x4) plane") {
    CriticalPointWindow w;
    w.min = {0.0, 0.0};
    w.max = {1.0, 1.0};
    CHECK_THROWS_AS(rw_critical_points(Expr::parse("x0+x1"), w), ConfigError);
  }
}

TEST_CASE("classification report carries the bundle check when asked") {
  const ThreadedMetric m = rw_leaf_metric();
  const Trajectory traj = leaf_trajectory(m, 2.0, 0.2);
  Region5 region;
  region.min = {1.9, -0.5, -0.5, -0.5, 4.5};
  region.max = {2.1, 0.5, 0.5, 0.5, 5.5};
  const ClassificationReport r = classify_trajectory(m, traj, 1e-8, region);
  REQUIRE(r.bundle.has_value());
  CHECK(r.bundle->nodes == 243);
  CHECK_FALSE(r.bundle->holds);  // expansions vanish only on the leaf itself
  CHECK(r.tol == 1e-8);
  CHECK(r.curve_threshold == doctest::Approx(1e-8 * (1.0 + 0.09)));
}
