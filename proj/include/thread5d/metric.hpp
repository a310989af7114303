#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "thread5d/expr.hpp"
#include "thread5d/linalg.hpp"

namespace thread5d {

enum class MetricFamily { Minkowski5, RW5, Custom };

// Raw metric description, typically parsed from the "metric" object of a
// scenario file: a family tag plus named field expressions.
struct MetricSpec {
  MetricFamily family = MetricFamily::Minkowski5;
  std::map<std::string, std::string> fields;
};

const char* family_name(MetricFamily f);
MetricFamily family_from_name(const std::string& name);  // throws ConfigError

// Map (alpha, beta) in 0..2 to the packed symmetric index 0..5
// (11,12,13,22,23,33 order).
inline int sym_index(int a, int b) {
  static constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[a][b];
}

// A threaded 5D metric: lapse-like Phi, vertical scale Psi, the two
// connection-form families A (temporal+spatial legs of the vertical form)
// and B (spatial legs of the temporal form), and the spatial 3-metric h.
// The warped-product family keeps its warping function f around for
// critical-point searches. Immutable after build; evaluation is pure.
class ThreadedMetric {
 public:
  MetricFamily family() const { return family_; }
  const Expr& phi() const { return phi_; }
  const Expr& psi() const { return psi_; }
  const Expr& A(int i) const { return a_[i]; }          // i in 0..3
  const Expr& B(int alpha) const { return b_[alpha]; }  // alpha in 0..2 for B1..B3
  const Expr& h(int a, int b) const { return h_[sym_index(a, b)]; }
  bool has_warping() const { return f_.has_value(); }
  const Expr& warping() const { return *f_; }           // rw5 only
  const Expr& spatial_g(int a, int b) const { return (*g_)[sym_index(a, b)]; }

 private:
  friend ThreadedMetric build_metric(const MetricSpec&);
  MetricFamily family_ = MetricFamily::Minkowski5;
  Expr phi_, psi_;
  std::array<Expr, 4> a_;
  std::array<Expr, 3> b_;
  std::array<Expr, 6> h_;
  std::optional<Expr> f_;
  std::optional<std::array<Expr, 6>> g_;
};

// All metric field jets at one point, with the inverse spatial metric.
// Symmetric h entries share a single jet through the packed storage.
struct MetricSample {
  Point5 point{};
  Jet5 phi, psi;
  std::array<Jet5, 4> A;
  std::array<Jet5, 3> B;
  std::array<Jet5, 6> h;
  Mat3 h_value{};
  Mat3 h_inv{};

  const Jet5& h_jet(int a, int b) const { return h[sym_index(a, b)]; }
};

// The assembled coordinate metric g_ab with jets, signature (-,+,+,+,+).
struct FullMetricSample {
  Point5 point{};
  std::array<std::array<Jet5, 5>, 5> g{};

  Mat5 value() const {
    Mat5 m{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) m[a][b] = g[a][b].v;
    return m;
  }
};

// Velocity in the adapted frame: u0 along the temporal leg, u_spatial the
// plain coordinate rates dx^alpha/dt, u4 along the vertical leg.
struct AdaptedVelocity {
  double u0 = 0.0;
  Vec3 spatial{};
  double u4 = 0.0;
};

// Validates the family field set, parses every expression, and expands the
// built-in families to the general field form. Throws ConfigError
// (bad family, missing/unknown fields, parse failures, rw5 variable-split
// violations).
ThreadedMetric build_metric(const MetricSpec& spec);

// Evaluates all field jets at p and checks pointwise validity: Phi and Psi
// must exceed 1e-12, and h must be SPD (leading principal minors > 1e-12).
// Throws NumericError on an invalid metric, EvalDomainError on expression
// domain violations.
MetricSample sample_fields(const ThreadedMetric& m, const Point5& p);

// Assembles the 5x5 coordinate metric and its jets from the field jets.
FullMetricSample assemble_full_metric(const ThreadedMetric& m, const Point5& p);
FullMetricSample assemble_full_metric(const MetricSample& s);

// The squared line element on an adapted velocity:
// -Phi^2 (u0)^2 + h_ab u^a u^b + Psi^2 (u4)^2.
double adapted_norm(const MetricSample& s, const AdaptedVelocity& u);
double adapted_norm(const ThreadedMetric& m, const Point5& p, const AdaptedVelocity& u);

} // namespace thread5d
