#pragma once

#include "thread5d/metric.hpp"

namespace thread5d {

// Kinematic quantities of the threading at one point: vorticities of the
// temporal and vertical distributions, expansion tensors and their traces,
// the anholonomy coefficients of the adapted frame, and logarithmic
// gradients of the two scale fields.
//
// Index conventions: spatial tensors are stored 0-based, so omega[0][1] is
// the (1,2) component. phi_log[0] is the temporal component, phi_log[1..3]
// the spatial ones; phi4 is the plain vertical derivative component.
struct KinematicSample {
  Mat3 omega{};   // antisymmetric
  Mat3 eta{};     // antisymmetric
  Mat3 theta{};   // symmetric
  Mat3 kappa{};   // symmetric
  double theta_trace = 0.0;
  double kappa_trace = 0.0;
  Vec3 a{};
  Vec3 b{};
  Vec3 c{};
  Vec3 d{};
  double a0 = 0.0;
  std::array<double, 4> phi_log{};
  double phi4 = 0.0;
  std::array<double, 4> psi_log{};
  double psi4 = 0.0;
};

// Directional derivative of a sampled field along one adapted frame leg:
//   index 4       -> d4 F
//   index 0       -> d0 F - A0 d4 F
//   index 1..3    -> da F - B_a (d0 F - A0 d4 F) - A_a d4 F
// where the d's are the plain coordinate partials carried by the jet.
double adapted_derivative(const MetricSample& s, const Jet5& field, int index);

KinematicSample kinematic_sample(const MetricSample& s);
KinematicSample kinematic_sample(const ThreadedMetric& m, const Point5& p);

// T_a^g = h^{gm} T_{ma}; first index of the mixed result is the raised one.
Mat3 raise_index(const Mat3& h_inv, const Mat3& T);
Vec3 raise_index(const Mat3& h_inv, const Vec3& v);
Mat3 lower_index(const Mat3& h, const Mat3& T_mixed);

} // namespace thread5d
