#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "fixtures.hpp"
#include "thread5d/metric.hpp"

using namespace thread5d;
using namespace thread5d::testing;

namespace {

std::map<std::string, std::string> trivial_custom_fields() {
  return {{"Phi", "1"}, {"Psi", "1"}, {"A0", "0"},  {"A1", "0"},  {"A2", "0"},
          {"A3", "0"},  {"B1", "0"},  {"B2", "0"},  {"B3", "0"},  {"h11", "1"},
          {"h12", "0"}, {"h13", "0"}, {"h22", "1"}, {"h23", "0"}, {"h33", "1"}};
}

} // namespace

TEST_CASE("family names round-trip and reject unknowns") {
  CHECK(family_from_name("minkowski5") == MetricFamily::Minkowski5);
  CHECK(family_from_name("rw5") == MetricFamily::RW5);
  CHECK(family_from_name("custom") == MetricFamily::Custom);
  CHECK(std::string(family_name(MetricFamily::RW5)) == "rw5");
  CHECK_THROWS_AS(family_from_name("schwarzschild"), ConfigError);
}

TEST_CASE("each family demands its exact field set") {
  CHECK_THROWS_AS(build_metric({MetricFamily::Minkowski5, {{"Phi", "1"}}}), ConfigError);

  std::map<std::string, std::string> rw = {{"f", "x0"},   {"g11", "1"}, {"g12", "0"},
                                           {"g13", "0"},  {"g22", "1"}, {"g23", "0"},
                                           {"g33", "1"}};
  CHECK_NOTHROW(build_metric({MetricFamily::RW5, rw}));

  auto missing = rw;
  missing.erase("g23");
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::RW5, missing}),
                       doctest::Contains("missing field 'g23'"), ConfigError);

  auto extra = rw;
  extra["Phi"] = "1";
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::RW5, extra}),
                       doctest::Contains("does not accept field 'Phi'"), ConfigError);

  auto custom = trivial_custom_fields();
  custom.erase("h33");
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::Custom, custom}),
                       doctest::Contains("missing field 'h33'"), ConfigError);
}

TEST_CASE("field parse failures name the field") {
  auto bad = trivial_custom_fields();
  bad["A2"] = "sin(x1";
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::Custom, bad}),
                       doctest::Contains("metric field 'A2'"), ConfigError);
}

TEST_CASE("warped family enforces the variable split") {
  std::map<std::string, std::string> rw = {{"f", "x1*x4"}, {"g11", "1"}, {"g12", "0"},
                                           {"g13", "0"},   {"g22", "1"}, {"g23", "0"},
                                           {"g33", "1"}};
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::RW5, rw}),
                       doctest::Contains("'f' may not depend on x1"), ConfigError);
  rw["f"] = "x0*x4";
  rw["g22"] = "1+x0^2";
  CHECK_THROWS_WITH_AS(build_metric({MetricFamily::RW5, rw}),
                       doctest::Contains("'g22' may not depend on x0"), ConfigError);
}

TEST_CASE("minkowski5 expands to the flat threading") {
  const ThreadedMetric m = minkowski_metric();
  Rng rng(0x5eed0010);
  const Point5 p = random_point(rng);
  const MetricSample s = sample_fields(m, p);
  CHECK(s.phi.v == 1.0);
  CHECK(s.psi.v == 1.0);
  for (int i = 0; i < 4; ++i) CHECK(s.A[i].v == 0.0);
  for (int a = 0; a < 3; ++a) CHECK(s.B[a].v == 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CHECK(s.h_value[a][b] == (a == b ? 1.0 : 0.0));
      CHECK(s.h_inv[a][b] == (a == b ? 1.0 : 0.0));
    }
  const Mat5 g = assemble_full_metric(m, p).value();
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const double want = (a != b) ? 0.0 : (a == 0 ? -1.0 : 1.0);
      CHECK(g[a][b] == want);
    }
  CHECK_FALSE(m.has_warping());
}

TEST_CASE("warped product evaluates h = f^2 g") {
  const ThreadedMetric m = rw_flat_metric();
  CHECK(m.has_warping());
  CHECK(m.warping().unparse() == "x0*x4");
  CHECK(m.spatial_g(0, 0).constant_value() == 1.0);

  const Point5 p{2.0, 0.0, 0.0, 0.0, 3.0};  // f = 6
  const MetricSample s = sample_fields(m, p);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      CHECK(s.h_value[a][b] == doctest::Approx(a == b ? 36.0 : 0.0));
      CHECK(s.h_inv[a][b] == doctest::Approx(a == b ? 1.0 / 36.0 : 0.0));
    }
  // d h11 / d x0 = 2 f f_0 = 2*6*3, d h11 / d x4 = 2*6*2.
  CHECK(s.h_jet(0, 0).d[0] == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(s.h_jet(0, 0).d[4] == doctest::Approx(24.0).epsilon(1e-14));

  const Mat5 g = assemble_full_metric(m, p).value();
  CHECK(g[0][0] == doctest::Approx(-1.0));
  CHECK(g[4][4] == doctest::Approx(1.0));
  for (int a = 1; a <= 3; ++a) CHECK(g[a][a] == doctest::Approx(36.0));
  CHECK(g[0][4] == doctest::Approx(0.0));
}

TEST_CASE("custom metric assembles the threaded line element") {
  // Only A0 nontrivial: g00 = -Phi^2 + Psi^2 A0^2, g04 = Psi^2 A0.
  auto f = trivial_custom_fields();
  f["A0"] = "x1";
  const ThreadedMetric m = build_metric({MetricFamily::Custom, f});
  const Point5 p{0.0, 2.0, 0.0, 0.0, 0.0};
  const Mat5 g = assemble_full_metric(m, p).value();
  CHECK(g[0][0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g[0][4] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g[4][0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g[4][4] == doctest::Approx(1.0));
  CHECK(g[0][1] == doctest::Approx(0.0));

  // Add B1: g01 = -Phi^2 B1 + Psi^2 A0 A1 = -0.5 at the same point.
  f["B1"] = "0.25*x1";
  const ThreadedMetric m2 = build_metric({MetricFamily::Custom, f});
  const Mat5 g2 = assemble_full_metric(m2, p).value();
  CHECK(g2[0][1] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g2[1][1] == doctest::Approx(1.0 - 0.25).epsilon(1e-15));  // h11 - Phi^2 B1^2
}

TEST_CASE("assembled metric matches the adapted norm through the velocity map") {
  const ThreadedMetric m = generic_metric();
  Rng rng(0x5eed0011);
  for (int trial = 0; trial < 20; ++trial) {
    const Point5 p = random_point(rng);
    const MetricSample s = sample_fields(m, p);
    const Mat5 g = assemble_full_metric(s).value();
    NaturalVelocity v{};
    for (auto& c : v) c = urand(rng, -1.0, 1.0);
    double quad = 0.0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) quad += g[a][b] * v[a] * v[b];
    const double nrm = adapted_norm(s, to_adapted(s, v));
    CHECK(quad == doctest::Approx(nrm).epsilon(1e-12));
  }
}

TEST_CASE("assembled metric jets match central differences") {
  const ThreadedMetric m = generic_metric();
  const Point5 p = generic_point();
  const FullMetricSample full = assemble_full_metric(m, p);
  const double h = 1e-6;
  for (int axis = 0; axis < 5; ++axis) {
    Point5 hi = p, lo = p;
    hi[axis] += h;
    lo[axis] -= h;
    const Mat5 ghi = assemble_full_metric(m, hi).value();
    const Mat5 glo = assemble_full_metric(m, lo).value();
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        const double fd = (ghi[a][b] - glo[a][b]) / (2.0 * h);
        CHECK(full.g[a][b].d[axis] == doctest::Approx(fd).epsilon(1e-7).scale(1.0));
      }
  }
}

TEST_CASE("random threaded metrics have Lorentzian signature") {
  Rng rng(0x5eed0012);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ThreadedMetric m = random_metric(seed);
    for (int trial = 0; trial < 4; ++trial) {
      const Mat5 g = assemble_full_metric(m, random_point(rng)).value();
      const auto ev = sym_eigenvalues(g);
      CHECK(ev[0] < 0.0);
      for (int i = 1; i < 5; ++i) CHECK(ev[i] > 0.0);
    }
  }
}

TEST_CASE("pointwise validity is enforced") {
  auto f = trivial_custom_fields();
  f["Phi"] = "x0";
  CHECK_THROWS_WITH_AS(sample_fields(build_metric({MetricFamily::Custom, f}),
                                     Point5{-1.0, 0.0, 0.0, 0.0, 0.0}),
                       doctest::Contains("Phi is not positive"), NumericError);

  f = trivial_custom_fields();
  f["Psi"] = "x4";
  CHECK_THROWS_WITH_AS(sample_fields(build_metric({MetricFamily::Custom, f}),
                                     Point5{0.0, 0.0, 0.0, 0.0, -2.0}),
                       doctest::Contains("Psi is not positive"), NumericError);

  f = trivial_custom_fields();
  f["h11"] = "x1";
  CHECK_THROWS_WITH_AS(sample_fields(build_metric({MetricFamily::Custom, f}),
                                     Point5{0.0, -1.0, 0.0, 0.0, 0.0}),
                       doctest::Contains("not positive definite"), NumericError);
}

TEST_CASE("packed symmetric storage shares components") {
  CHECK(sym_index(0, 0) == 0);
  CHECK(sym_index(0, 1) == sym_index(1, 0));
  CHECK(sym_index(2, 2) == 5);
  const MetricSample s = sample_fields(generic_metric(), generic_point());
  CHECK(&s.h_jet(1, 2) == &s.h_jet(2, 1));
}

TEST_CASE("adapted norm applies the threaded line element") {
  const MetricSample s = sample_fields(minkowski_metric(), Point5{});
  const AdaptedVelocity u{1.0, {0.3, 0.0, 0.0}, 0.2};
  CHECK(adapted_norm(s, u) == doctest::Approx(-0.87).epsilon(1e-15));

  auto f = trivial_custom_fields();
  f["Phi"] = "2";
  f["h22"] = "4";
  const ThreadedMetric m = build_metric({MetricFamily::Custom, f});
  const AdaptedVelocity w{0.5, {0.0, 1.0, 0.0}, 1.0};
  // -4*0.25 + 4*1 + 1*1 = 4
  CHECK(adapted_norm(m, Point5{}, w) == doctest::Approx(4.0).epsilon(1e-15));
}
