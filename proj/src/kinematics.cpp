#include "thread5d/kinematics.hpp"

namespace thread5d {

double adapted_derivative(const MetricSample& s, const Jet5& field, int index) {
  const double d_temporal = field.d[0] - s.A[0].v * field.d[4];
  switch (index) {
    case 0:
      return d_temporal;
    case 4:
      return field.d[4];
    default:
      return field.d[index] - s.B[index - 1].v * d_temporal -
             s.A[index].v * field.d[4];
  }
}

KinematicSample kinematic_sample(const MetricSample& s) {
  KinematicSample k;

  // Adapted spatial derivatives of the frame-form fields, one triangle each;
  // antisymmetry and symmetry then hold exactly by construction.
  for (int al = 0; al < 3; ++al) {
    for (int be = al + 1; be < 3; ++be) {
      const double w = 0.5 * (adapted_derivative(s, s.B[be], al + 1) -
                              adapted_derivative(s, s.B[al], be + 1));
      k.omega[al][be] = w;
      k.omega[be][al] = -w;

      const double e = 0.5 * (adapted_derivative(s, s.A[be + 1], al + 1) -
                              adapted_derivative(s, s.A[al + 1], be + 1) +
                              s.B[al].v * adapted_derivative(s, s.A[0], be + 1) -
                              s.B[be].v * adapted_derivative(s, s.A[0], al + 1));
      k.eta[al][be] = e;
      k.eta[be][al] = -e;
    }
  }

  for (int al = 0; al < 3; ++al) {
    for (int be = al; be < 3; ++be) {
      const Jet5& hj = s.h_jet(al, be);
      const double th = 0.5 * adapted_derivative(s, hj, 0);
      const double ka = 0.5 * hj.d[4];
      k.theta[al][be] = k.theta[be][al] = th;
      k.kappa[al][be] = k.kappa[be][al] = ka;
    }
  }

  for (int al = 0; al < 3; ++al)
    for (int be = 0; be < 3; ++be) {
      k.theta_trace += s.h_inv[al][be] * k.theta[al][be];
      k.kappa_trace += s.h_inv[al][be] * k.kappa[al][be];
    }

  for (int al = 0; al < 3; ++al) {
    k.a[al] = adapted_derivative(s, s.A[al + 1], 0) -
              adapted_derivative(s, s.A[0], al + 1) -
              s.B[al].v * adapted_derivative(s, s.A[0], 0);
    k.b[al] = adapted_derivative(s, s.B[al], 0);
    k.c[al] = s.A[al + 1].d[4] - s.B[al].v * s.A[0].d[4];
    k.d[al] = s.B[al].d[4];
  }

  // The temporal-vertical anholonomy: [d/dx0 - A0 d4, d4] = (d4 A0) d4.
  k.a0 = s.A[0].d[4];

  const double inv_phi = 1.0 / s.phi.v;
  const double inv_psi = 1.0 / s.psi.v;
  for (int i = 0; i < 4; ++i) {
    k.phi_log[i] = inv_phi * adapted_derivative(s, s.phi, i);
    k.psi_log[i] = inv_psi * adapted_derivative(s, s.psi, i);
  }
  k.phi4 = inv_phi * s.phi.d[4];
  k.psi4 = inv_psi * s.psi.d[4];

  return k;
}

KinematicSample kinematic_sample(const ThreadedMetric& m, const Point5& p) {
  return kinematic_sample(sample_fields(m, p));
}

Mat3 raise_index(const Mat3& h_inv, const Mat3& T) {
  Mat3 r{};
  for (int g = 0; g < 3; ++g)
    for (int al = 0; al < 3; ++al)
      for (int mu = 0; mu < 3; ++mu) r[g][al] += h_inv[g][mu] * T[mu][al];
  return r;
}

Vec3 raise_index(const Mat3& h_inv, const Vec3& v) {
  Vec3 r{};
  for (int g = 0; g < 3; ++g)
    for (int mu = 0; mu < 3; ++mu) r[g] += h_inv[g][mu] * v[mu];
  return r;
}

Mat3 lower_index(const Mat3& h, const Mat3& T_mixed) {
  Mat3 r{};
  for (int m = 0; m < 3; ++m)
    for (int al = 0; al < 3; ++al)
      for (int g = 0; g < 3; ++g) r[m][al] += h[m][g] * T_mixed[g][al];
  return r;
}

} // namespace thread5d
