#include "thread5d/metric.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace thread5d {

namespace {

std::string format_point(const Point5& p) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "(%.17g, %.17g, %.17g, %.17g, %.17g)",
                p[0], p[1], p[2], p[3], p[4]);
  return buf;
}

Expr parse_field(const std::string& name, const std::string& src) {
  try {
    return Expr::parse(src);
  } catch (const ParseError& e) {
    throw ConfigError("metric field '" + name + "': " + e.what());
  }
}

// Every family accepts exactly one field set; anything missing or extra is
// a config error so typos never silently fall back to defaults.
void check_field_names(const MetricSpec& spec, const std::vector<std::string>& allowed) {
  for (const auto& name : allowed)
    if (!spec.fields.count(name))
      throw ConfigError(std::string("metric family '") + family_name(spec.family) +
                        "' is missing field '" + name + "'");
  for (const auto& [name, src] : spec.fields) {
    (void)src;
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw ConfigError(std::string("metric family '") + family_name(spec.family) +
                        "' does not accept field '" + name + "'");
  }
}

void check_variable_split(const Expr& e, const std::string& name,
                          std::initializer_list<int> allowed_axes) {
  const auto used = e.free_variables();
  for (int axis = 0; axis < 5; ++axis) {
    if (!used[axis]) continue;
    if (std::find(allowed_axes.begin(), allowed_axes.end(), axis) == allowed_axes.end())
      throw ConfigError("metric field '" + name + "' may not depend on x" +
                        std::to_string(axis));
  }
}

// h_ab = f^2 * g_ab, with the trivial g values folded away so the common
// flat-g case produces the expression f^2 directly.
Expr warped_component(const Expr& f, const Expr& g) {
  const Expr f2 = Expr::binary(BinaryOp::Pow, f, Expr::number(2.0));
  if (auto c = g.constant_value()) {
    if (*c == 1.0) return f2;
    if (*c == 0.0) return Expr::number(0.0);
  }
  return Expr::binary(BinaryOp::Mul, f2, g);
}

constexpr double kPositivityTol = 1e-12;

} // namespace

const char* family_name(MetricFamily f) {
  switch (f) {
    case MetricFamily::Minkowski5: return "minkowski5";
    case MetricFamily::RW5: return "rw5";
    case MetricFamily::Custom: return "custom";
  }
  return "?";
}

MetricFamily family_from_name(const std::string& name) {
  if (name == "minkowski5") return MetricFamily::Minkowski5;
  if (name == "rw5") return MetricFamily::RW5;
  if (name == "custom") return MetricFamily::Custom;
  throw ConfigError("unknown metric family '" + name +
                    "' (expected minkowski5, rw5, or custom)");
}

ThreadedMetric build_metric(const MetricSpec& spec) {
  ThreadedMetric m;
  m.family_ = spec.family;

  const Expr zero = Expr::number(0.0);
  const Expr one = Expr::number(1.0);

  switch (spec.family) {
    case MetricFamily::Minkowski5: {
      check_field_names(spec, {});
      m.phi_ = one;
      m.psi_ = one;
      m.a_ = {zero, zero, zero, zero};
      m.b_ = {zero, zero, zero};
      m.h_ = {one, zero, zero, one, zero, one};
      return m;
    }

    case MetricFamily::RW5: {
      check_field_names(spec, {"f", "g11", "g12", "g13", "g22", "g23", "g33"});
      Expr f = parse_field("f", spec.fields.at("f"));
      check_variable_split(f, "f", {0, 4});
      std::array<Expr, 6> g;
      static const char* kG[6] = {"g11", "g12", "g13", "g22", "g23", "g33"};
      for (int i = 0; i < 6; ++i) {
        g[i] = parse_field(kG[i], spec.fields.at(kG[i]));
        check_variable_split(g[i], kG[i], {1, 2, 3});
      }
      m.phi_ = one;
      m.psi_ = one;
      m.a_ = {zero, zero, zero, zero};
      m.b_ = {zero, zero, zero};
      for (int i = 0; i < 6; ++i) m.h_[i] = warped_component(f, g[i]);
      m.f_ = f;
      m.g_ = g;
      return m;
    }

    case MetricFamily::Custom: {
      check_field_names(spec, {"Phi", "Psi", "A0", "A1", "A2", "A3", "B1", "B2",
                               "B3", "h11", "h12", "h13", "h22", "h23", "h33"});
      m.phi_ = parse_field("Phi", spec.fields.at("Phi"));
      m.psi_ = parse_field("Psi", spec.fields.at("Psi"));
      static const char* kA[4] = {"A0", "A1", "A2", "A3"};
      for (int i = 0; i < 4; ++i) m.a_[i] = parse_field(kA[i], spec.fields.at(kA[i]));
      static const char* kB[3] = {"B1", "B2", "B3"};
      for (int i = 0; i < 3; ++i) m.b_[i] = parse_field(kB[i], spec.fields.at(kB[i]));
      static const char* kH[6] = {"h11", "h12", "h13", "h22", "h23", "h33"};
      for (int i = 0; i < 6; ++i) m.h_[i] = parse_field(kH[i], spec.fields.at(kH[i]));
      return m;
    }
  }
  throw ConfigError("unknown metric family tag");
}

MetricSample sample_fields(const ThreadedMetric& m, const Point5& p) {
  MetricSample s;
  s.point = p;
  s.phi = m.phi().eval_jet(p);
  s.psi = m.psi().eval_jet(p);
  for (int i = 0; i < 4; ++i) s.A[i] = m.A(i).eval_jet(p);
  for (int i = 0; i < 3; ++i) s.B[i] = m.B(i).eval_jet(p);
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) s.h[sym_index(a, b)] = m.h(a, b).eval_jet(p);

  if (!(s.phi.v > kPositivityTol))
    throw NumericError("Phi is not positive at " + format_point(p));
  if (!(s.psi.v > kPositivityTol))
    throw NumericError("Psi is not positive at " + format_point(p));

  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s.h_value[a][b] = s.h_jet(a, b).v;

  const auto minors = leading_minors3(s.h_value);
  for (double mnr : minors)
    if (!(mnr > kPositivityTol))
      throw NumericError("spatial metric h is not positive definite at " +
                         format_point(p));

  s.h_inv = inverse3(s.h_value);
  return s;
}

FullMetricSample assemble_full_metric(const MetricSample& s) {
  FullMetricSample F;
  F.point = s.point;
  const Jet5 phi2 = s.phi * s.phi;
  const Jet5 psi2 = s.psi * s.psi;

  F.g[0][0] = -phi2 + psi2 * s.A[0] * s.A[0];
  for (int a = 1; a <= 3; ++a) {
    F.g[0][a] = -phi2 * s.B[a - 1] + psi2 * s.A[0] * s.A[a];
    for (int b = a; b <= 3; ++b)
      F.g[a][b] = s.h_jet(a - 1, b - 1) - phi2 * s.B[a - 1] * s.B[b - 1] +
                  psi2 * s.A[a] * s.A[b];
    F.g[a][4] = psi2 * s.A[a];
  }
  F.g[0][4] = psi2 * s.A[0];
  F.g[4][4] = psi2;

  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < a; ++b) F.g[a][b] = F.g[b][a];
  return F;
}

FullMetricSample assemble_full_metric(const ThreadedMetric& m, const Point5& p) {
  return assemble_full_metric(sample_fields(m, p));
}

double adapted_norm(const MetricSample& s, const AdaptedVelocity& u) {
  double spatial = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      spatial += s.h_value[a][b] * u.spatial[a] * u.spatial[b];
  return -s.phi.v * s.phi.v * u.u0 * u.u0 + spatial + s.psi.v * s.psi.v * u.u4 * u.u4;
}

double adapted_norm(const ThreadedMetric& m, const Point5& p, const AdaptedVelocity& u) {
  return adapted_norm(sample_fields(m, p), u);
}

} // namespace thread5d
