#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace thread5d {

// First-order forward-mode derivative object over the five coordinates
// x0..x4: a value plus the gradient with respect to the evaluation point.
// All field derivatives in the library come from these jets; there is no
// finite differencing anywhere in the production path.
struct Jet5 {
  double v = 0.0;
  std::array<double, 5> d{};

  static Jet5 constant(double value) { return Jet5{value, {}}; }

  // Seed for coordinate x[axis]: value with unit partial in that slot.
  static Jet5 variable(double value, std::size_t axis) {
    Jet5 j{value, {}};
    j.d[axis] = 1.0;
    return j;
  }
};

inline Jet5 operator+(const Jet5& a, const Jet5& b) {
  Jet5 r{a.v + b.v, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] + b.d[i];
  return r;
}

inline Jet5 operator-(const Jet5& a, const Jet5& b) {
  Jet5 r{a.v - b.v, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] - b.d[i];
  return r;
}

inline Jet5 operator-(const Jet5& a) {
  Jet5 r{-a.v, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = -a.d[i];
  return r;
}

inline Jet5 operator*(const Jet5& a, const Jet5& b) {
  Jet5 r{a.v * b.v, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  return r;
}

inline Jet5 operator/(const Jet5& a, const Jet5& b) {
  // Caller guarantees b.v != 0; the expression evaluator checks first.
  Jet5 r{a.v / b.v, {}};
  const double inv2 = 1.0 / (b.v * b.v);
  for (int i = 0; i < 5; ++i) r.d[i] = (a.d[i] * b.v - a.v * b.d[i]) * inv2;
  return r;
}

inline Jet5 operator+(const Jet5& a, double s) { return a + Jet5::constant(s); }
inline Jet5 operator+(double s, const Jet5& a) { return Jet5::constant(s) + a; }
inline Jet5 operator-(const Jet5& a, double s) { return a - Jet5::constant(s); }
inline Jet5 operator-(double s, const Jet5& a) { return Jet5::constant(s) - a; }
inline Jet5 operator*(const Jet5& a, double s) {
  Jet5 r{a.v * s, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = a.d[i] * s;
  return r;
}
inline Jet5 operator*(double s, const Jet5& a) { return a * s; }
inline Jet5 operator/(const Jet5& a, double s) { return a * (1.0 / s); }
inline Jet5 operator/(double s, const Jet5& a) { return Jet5::constant(s) / a; }

// chain(f(x), f'(x), x): lifts a scalar function through the jet.
inline Jet5 chain(double f, double fprime, const Jet5& x) {
  Jet5 r{f, {}};
  for (int i = 0; i < 5; ++i) r.d[i] = fprime * x.d[i];
  return r;
}

inline Jet5 sin(const Jet5& x) { return chain(std::sin(x.v), std::cos(x.v), x); }
inline Jet5 cos(const Jet5& x) { return chain(std::cos(x.v), -std::sin(x.v), x); }
inline Jet5 tan(const Jet5& x) {
  const double t = std::tan(x.v);
  return chain(t, 1.0 + t * t, x);
}
inline Jet5 exp(const Jet5& x) {
  const double e = std::exp(x.v);
  return chain(e, e, x);
}
inline Jet5 log(const Jet5& x) { return chain(std::log(x.v), 1.0 / x.v, x); }
inline Jet5 sqrt(const Jet5& x) {
  const double s = std::sqrt(x.v);
  // d(sqrt) blows up at 0; the evaluator rejects negative arguments and a
  // zero argument with nonzero partials yields inf, which the caller sees.
  return chain(s, 0.5 / s, x);
}
inline Jet5 sinh(const Jet5& x) { return chain(std::sinh(x.v), std::cosh(x.v), x); }
inline Jet5 cosh(const Jet5& x) { return chain(std::cosh(x.v), std::sinh(x.v), x); }
inline Jet5 tanh(const Jet5& x) {
  const double t = std::tanh(x.v);
  return chain(t, 1.0 - t * t, x);
}
inline Jet5 abs(const Jet5& x) { return chain(std::fabs(x.v), x.v < 0.0 ? -1.0 : 1.0, x); }

// x^n for integer n, valid for any base (power rule). n = 0 gives the
// constant 1. Negative n with zero base is the caller's error.
inline Jet5 pow_int(const Jet5& x, long long n) {
  if (n == 0) return Jet5::constant(1.0);
  const double f = std::pow(x.v, static_cast<double>(n));
  const double fp = static_cast<double>(n) * std::pow(x.v, static_cast<double>(n - 1));
  return chain(f, fp, x);
}

// x^y for non-integer exponent jets; requires x.v > 0 (checked by caller).
inline Jet5 pow_general(const Jet5& x, const Jet5& y) {
  const double f = std::pow(x.v, y.v);
  const double lx = std::log(x.v);
  Jet5 r{f, {}};
  for (int i = 0; i < 5; ++i)
    r.d[i] = f * (y.d[i] * lx + y.v * x.d[i] / x.v);
  return r;
}

} // namespace thread5d
