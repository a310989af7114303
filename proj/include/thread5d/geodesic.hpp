#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "thread5d/connection.hpp"

namespace thread5d {

// Velocity in plain coordinates, dx^a/dt for a = 0..4.
using NaturalVelocity = Vec5;

// The second-order geodesic system exists in two printings that disagree in
// one coefficient of the temporal equation; both are kept so the numerical
// comparison against the coordinate oracle can arbitrate. Derived is the
// default and the one consistent with the covariant-derivative table.
enum class RhsVariant { Derived, AsPrinted };
const char* variant_name(RhsVariant v);
RhsVariant variant_from_name(const std::string& name);  // throws ConfigError

struct GeodesicState {
  Point5 point{};
  AdaptedVelocity vel{};
};

// Which right-hand side produced a trajectory. External covers CSV imports
// and constructed curves where no integrator RHS is available.
enum class RhsKind { AdaptedDerived, AdaptedAsPrinted, Oracle, External };

struct TrajectoryMeta {
  std::string integrator = "external";  // "rk4" | "rkf45" | "external"
  double step = 0.0;
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  RhsKind kind = RhsKind::External;
  double max_norm_drift = 0.0;
};

struct TrajectorySample {
  double t = 0.0;
  GeodesicState state;
  double norm = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryMeta meta;
};

// Velocity maps between the natural and adapted frames:
//   u0 = v0 + B_a v^a,  u^a = v^a,  u4 = v4 + A_i v^i;
// the inverse solves the triangular system (v0 first, then v4).
AdaptedVelocity to_adapted(const MetricSample& s, const NaturalVelocity& v);
NaturalVelocity to_natural(const MetricSample& s, const AdaptedVelocity& u);

struct StateDerivative {
  Point5 dpoint{};
  double du0 = 0.0;
  Vec3 du_spatial{};
  double du4 = 0.0;
};

// The threaded equations of motion: position rates from the velocity map,
// adapted-velocity rates from the quadratic forms in the kinematic and
// connection coefficients.
StateDerivative rhs_adapted(const ThreadedMetric& m, const GeodesicState& s,
                            RhsVariant variant);

// Standard Levi-Civita symbols of the assembled 5x5 metric; independent of
// the adapted-frame machinery, used as the cross-check oracle.
using Christoffel5 = std::array<std::array<std::array<double, 5>, 5>, 5>;
Christoffel5 christoffel_full(const ThreadedMetric& m, const Point5& p);

struct IntegratorOptions {
  enum class Kind { Rk4, Rkf45 };
  Kind kind = Kind::Rk4;
  double step = 1e-3;     // rk4 step size; rkf45 initial step
  double abs_tol = 1e-9;  // rkf45 only
  double rel_tol = 1e-9;  // rkf45 only
  RhsVariant variant = RhsVariant::Derived;
};

// Emission grid of the fixed-step integrator: t0, t0+step, ..., t1, with a
// shorter final interval closing any remainder. Shared with the constructed
// line families so their samples land on the same times.
std::vector<double> rk4_grid(double t0, double t1, double step);

// Integrates the adapted system from s0 over [t0, t1], recording every
// accepted step with the line-element norm of the running velocity.
// Throws NumericError on step collapse, non-finite state, or a field
// evaluation failure mid-flight (the message carries the last good t).
Trajectory integrate(const ThreadedMetric& m, const GeodesicState& s0, double t0,
                     double t1, const IntegratorOptions& opts);

// Same interface, but integrates d^2x/dt^2 + Gamma(x) dx dx = 0 in natural
// coordinates and converts each sample back to adapted velocities.
Trajectory integrate_oracle(const ThreadedMetric& m, const GeodesicState& s0,
                            double t0, double t1, const IntegratorOptions& opts);

// CSV exchange format. Header: t,x0,x1,x2,x3,x4,u0,u1,u2,u3,u4,norm with
// 17 significant digits per value. The reader enforces the exact header and
// strictly increasing t, and tags the result as external.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& is);

} // namespace thread5d
