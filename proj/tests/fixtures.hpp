#pragma once

// Shared test fixtures: pinned metrics, seeded random generators, and the
// independent oracles the suite checks the library against.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "thread5d/classify.hpp"
#include "thread5d/connection.hpp"
#include "thread5d/geodesic.hpp"
#include "thread5d/kinematics.hpp"
#include "thread5d/metric.hpp"

namespace thread5d::testing {

//--- randomness -------------------------------------------------------------

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with full 53-bit resolution.
inline double urand(Rng& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline double urand(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * urand(rng);
}

inline Point5 random_point(Rng& rng, double lo = -0.8, double hi = 0.8) {
  Point5 p{};
  for (auto& c : p) c = urand(rng, lo, hi);
  return p;
}

//--- pinned metrics ----------------------------------------------------------

// Fully generic custom metric: every field nonconstant or coupling present,
// valid on all of R^5 (Phi in [1.2, 1.8], Psi in [0.7, 1.3], h diagonally
// dominant SPD). Mirrors scenarios/generic.json.
inline const std::map<std::string, std::string>& generic_fields() {
  static const std::map<std::string, std::string> fields = {
      {"Phi", "1.5+0.3*sin(x1+0.5*x0)"},
      {"Psi", "1+0.2*cos(x2)+0.1*sin(x4)"},
      {"A0", "0.3*sin(x4)+0.2*x1"},
      {"A1", "0.2*cos(x0)"},
      {"A2", "0.15*sin(x3)"},
      {"A3", "0.1*x1"},
      {"B1", "0.25*sin(x2)"},
      {"B2", "0.2*cos(x4)"},
      {"B3", "0.1*sin(x0+x3)"},
      {"h11", "1.3+0.2*sin(x0)*cos(x4)"},
      {"h12", "0.1*cos(x3)"},
      {"h13", "0.05*sin(x1)"},
      {"h22", "1.4+0.25*cos(x0+x1)"},
      {"h23", "0.08*cos(x0)"},
      {"h33", "1.2+0.15*sin(x2+x4)"}};
  return fields;
}

inline ThreadedMetric generic_metric() {
  return build_metric({MetricFamily::Custom, generic_fields()});
}

inline Point5 generic_point() { return {0.2, 0.1, -0.3, 0.4, 0.5}; }

inline AdaptedVelocity generic_velocity() {
  return AdaptedVelocity{1.0, {0.3, -0.2, 0.25}, 0.4};
}

inline ThreadedMetric minkowski_metric() {
  return build_metric({MetricFamily::Minkowski5, {}});
}

// Warped product with f = x0*x4 over a flat spatial base.
inline ThreadedMetric rw_flat_metric() {
  std::map<std::string, std::string> f = {{"f", "x0*x4"},   {"g11", "1"},
                                          {"g12", "0"},     {"g13", "0"},
                                          {"g22", "1"},     {"g23", "0"},
                                          {"g33", "1"}};
  return build_metric({MetricFamily::RW5, f});
}

// Warped product whose warping has an isolated critical point at (2, 5).
inline ThreadedMetric rw_leaf_metric() {
  std::map<std::string, std::string> f = {{"f", "1+(x0-2)^2+(x4-5)^2"},
                                          {"g11", "1"},
                                          {"g12", "0"},
                                          {"g13", "0"},
                                          {"g22", "1"},
                                          {"g23", "0"},
                                          {"g33", "1"}};
  return build_metric({MetricFamily::RW5, f});
}

// Curved spatial metric that is independent of x0 and x4, so both expansion
// tensors vanish identically while Phi, Psi, A, B stay nontrivial.
inline ThreadedMetric killing_metric() {
  std::map<std::string, std::string> f = {
      {"Phi", "1.2+0.3*sin(x1)"},
      {"Psi", "1+0.2*cos(x2)"},
      {"A0", "0.4*sin(x2)"},
      {"A1", "0.2*cos(x3)"},
      {"A2", "0.1*x1"},
      {"A3", "0.15*sin(x1)"},
      {"B1", "0.2*sin(x3)"},
      {"B2", "0.25*cos(x1)"},
      {"B3", "0.1*x2"},
      {"h11", "1.4+0.3*sin(x2)"},
      {"h12", "0.1*cos(x3)"},
      {"h13", "0.05*sin(x1+x2)"},
      {"h22", "1.3+0.2*cos(x1)"},
      {"h23", "0.08*sin(x3)"},
      {"h33", "1.5+0.25*cos(x1+x3)"}};
  return build_metric({MetricFamily::Custom, f});
}

// Round 3-sphere as the spatial block, trivial everything else. Valid when
// 0 < x1 < pi and 0 < x2 < pi.
inline ThreadedMetric sphere3_metric() {
  std::map<std::string, std::string> f = {
      {"Phi", "1"},          {"Psi", "1"},
      {"A0", "0"},           {"A1", "0"},
      {"A2", "0"},           {"A3", "0"},
      {"B1", "0"},           {"B2", "0"},
      {"B3", "0"},           {"h11", "1"},
      {"h12", "0"},          {"h13", "0"},
      {"h22", "sin(x1)^2"},  {"h23", "0"},
      {"h33", "sin(x1)^2*sin(x2)^2"}};
  return build_metric({MetricFamily::Custom, f});
}

// Christoffel symbols of the round 3-sphere in (x1, x2, x3) coordinates,
// written out from the closed forms. Indices are 0-based spatial.
inline std::array<std::array<std::array<double, 3>, 3>, 3> sphere3_gamma(
    const Point5& p) {
  const double th = p[1];
  const double ph = p[2];
  const double cot_th = std::cos(th) / std::sin(th);
  const double cot_ph = std::cos(ph) / std::sin(ph);
  std::array<std::array<std::array<double, 3>, 3>, 3> g{};
  g[0][1][1] = -std::sin(th) * std::cos(th);
  g[0][2][2] = -std::sin(th) * std::cos(th) * std::sin(ph) * std::sin(ph);
  g[1][0][1] = g[1][1][0] = cot_th;
  g[1][2][2] = -std::sin(ph) * std::cos(ph);
  g[2][0][2] = g[2][2][0] = cot_th;
  g[2][1][2] = g[2][2][1] = cot_ph;
  return g;
}

//--- random metric generator --------------------------------------------------

inline std::string fmt3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

// Small bounded trig perturbations keep every sample SPD and well inside the
// valid region for points in [-1, 1]^5.
inline ThreadedMetric random_metric(std::uint64_t seed) {
  Rng rng(seed);
  auto wave = [&](double amp_lo, double amp_hi) {
    const double amp = urand(rng, amp_lo, amp_hi);
    const int v1 = static_cast<int>(rng() % 5);
    const int v2 = static_cast<int>(rng() % 5);
    const double phase = urand(rng, 0.0, 6.28);
    const char* fn = (rng() % 2 == 0) ? "sin" : "cos";
    return fmt3(amp) + "*" + fn + "(x" + std::to_string(v1) + "+0.7*x" +
           std::to_string(v2) + "+" + fmt3(phase) + ")";
  };
  std::map<std::string, std::string> f;
  f["Phi"] = "1.5+" + wave(0.1, 0.3);
  f["Psi"] = "1.2+" + wave(0.1, 0.3);
  for (int i = 0; i < 4; ++i) f["A" + std::to_string(i)] = wave(0.05, 0.2);
  for (int a = 1; a <= 3; ++a) f["B" + std::to_string(a)] = wave(0.05, 0.2);
  f["h11"] = "1.4+" + wave(0.1, 0.25);
  f["h22"] = "1.5+" + wave(0.1, 0.25);
  f["h33"] = "1.3+" + wave(0.1, 0.25);
  f["h12"] = wave(0.02, 0.08);
  f["h13"] = wave(0.02, 0.08);
  f["h23"] = wave(0.02, 0.08);
  return build_metric({MetricFamily::Custom, f});
}

//--- random expression generator ----------------------------------------------

// Rounds a literal so its unparse stays short; sinh/cosh/exp stacks stay
// bounded because arguments are in [-2, 2] at depth <= 3.
inline double fmtd(double x) { return std::round(x * 1000.0) / 1000.0; }

// Random expression over x0..x4 built to stay finite near the probe points:
// denominators and log/sqrt arguments are offset trig forms bounded away
// from zero, powers use small integer literal exponents.
inline Expr random_expression(Rng& rng, int depth = 3) {
  // Literals stay non-negative: parsed negative constants are negation nodes,
  // so a bare negative Number would not survive the unparse/parse round-trip.
  const auto leaf = [&]() -> Expr {
    if (rng() % 3 == 0) return Expr::number(fmtd(urand(rng, 0.0, 2.0)));
    return Expr::variable(static_cast<int>(rng() % 5));
  };
  if (depth <= 0) return leaf();
  switch (rng() % 8) {
    case 0: return Expr::binary(BinaryOp::Add, random_expression(rng, depth - 1),
                                random_expression(rng, depth - 1));
    case 1: return Expr::binary(BinaryOp::Sub, random_expression(rng, depth - 1),
                                random_expression(rng, depth - 1));
    case 2: return Expr::binary(BinaryOp::Mul, random_expression(rng, depth - 1),
                                random_expression(rng, depth - 1));
    case 3: {
      // Denominator bounded away from zero: 2 + sin(sub).
      Expr den = Expr::binary(BinaryOp::Add, Expr::number(2.0),
                              Expr::call(FuncId::Sin, random_expression(rng, depth - 1)));
      return Expr::binary(BinaryOp::Div, random_expression(rng, depth - 1), den);
    }
    case 4: {
      static constexpr FuncId safe[] = {FuncId::Sin, FuncId::Cos, FuncId::Tanh,
                                        FuncId::Sinh, FuncId::Cosh, FuncId::Exp};
      return Expr::call(safe[rng() % 6], random_expression(rng, depth - 1));
    }
    case 5: {
      // log and sqrt over arguments >= 1.
      Expr arg = Expr::binary(BinaryOp::Add, Expr::number(2.0),
                              Expr::call(FuncId::Cos, random_expression(rng, depth - 1)));
      return Expr::call(rng() % 2 == 0 ? FuncId::Log : FuncId::Sqrt, arg);
    }
    case 6: {
      const double n = (rng() % 2 == 0) ? 2.0 : 3.0;
      return Expr::binary(BinaryOp::Pow, random_expression(rng, depth - 1),
                          Expr::number(n));
    }
    default: return leaf();
  }
}

//--- difference oracles --------------------------------------------------------

inline double central_diff(const Expr& e, const Point5& p, int axis, double h) {
  Point5 hi = p, lo = p;
  hi[axis] += h;
  lo[axis] -= h;
  return (e.eval_jet(hi).v - e.eval_jet(lo).v) / (2.0 * h);
}

//--- symmetric eigenvalues (signature checks) -----------------------------------

// Cyclic Jacobi on a symmetric 5x5; returns eigenvalues sorted ascending.
inline std::array<double, 5> sym_eigenvalues(Mat5 a) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 5; ++p)
      for (int q = p + 1; q < 5; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < 5; ++p) {
      for (int q = p + 1; q < 5; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 5; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 5; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 5> ev{};
  for (int i = 0; i < 5; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

//--- frame-row oracle ------------------------------------------------------------

// Natural components of the adapted frame fields with their coordinate
// partials, assembled directly from the field jets.
inline std::array<Jet5, 5> frame_field_jets(const MetricSample& s, int i) {
  std::array<Jet5, 5> e{};
  if (i == 0) {
    e[0] = Jet5::constant(1.0);
    e[4] = -s.A[0];
  } else if (i >= 1 && i <= 3) {
    e[0] = -s.B[i - 1];
    e[i] = Jet5::constant(1.0);
    e[4] = s.B[i - 1] * s.A[0] - s.A[i];
  } else {
    e[4] = Jet5::constant(1.0);
  }
  return e;
}

// Decomposes a natural-components vector into adapted frame coefficients.
inline LcRow decompose_to_frame(const MetricSample& s, const Vec5& w) {
  LcRow r{};
  for (int g = 0; g < 3; ++g) r.spatial[g] = w[g + 1];
  r.temporal = w[0];
  for (int g = 0; g < 3; ++g) r.temporal += s.B[g].v * w[g + 1];
  r.vertical = w[4] + s.A[0].v * w[0];
  for (int g = 0; g < 3; ++g) r.vertical += s.A[g + 1].v * w[g + 1];
  return r;
}

// Independent covariant-derivative oracle: nabla_{F_i} F_j from the full 5D
// Christoffel symbols and the frame-component partials, decomposed back into
// the adapted frame. Exercises none of the kinematic machinery.
inline LcRow lc_row_oracle(const ThreadedMetric& m, const Point5& p, int i, int j) {
  const MetricSample s = sample_fields(m, p);
  const auto ei = frame_field_jets(s, i);
  const auto ej = frame_field_jets(s, j);
  const Christoffel5 gamma = christoffel_full(m, p);
  Vec5 w{};
  for (int c = 0; c < 5; ++c) {
    double acc = 0.0;
    for (int a = 0; a < 5; ++a) {
      acc += ei[a].v * ej[c].d[a];
      for (int b = 0; b < 5; ++b) acc += gamma[c][a][b] * ei[a].v * ej[b].v;
    }
    w[c] = acc;
  }
  return decompose_to_frame(s, w);
}

//--- misc ------------------------------------------------------------------------

inline double max_abs_diff(const Vec3& a, const Vec3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m = std::max(m, std::fabs(a[i][j] - b[i][j]));
  return m;
}

inline double max_abs(const Mat3& a) {
  double m = 0.0;
  for (const auto& row : a)
    for (double x : row) m = std::max(m, std::fabs(x));
  return m;
}

} // namespace thread5d::testing
