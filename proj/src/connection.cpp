#include "thread5d/connection.hpp"

#include <cmath>

namespace thread5d {

SpatialConnection spatial_connection(const MetricSample& s, const KinematicSample& k) {
  SpatialConnection sc;

  // Adapted spatial derivatives of every independent h component, cached:
  // dh[mu][al][be] = adapted derivative of h_{al be} along spatial leg mu.
  double dh[3][3][3];
  for (int mu = 0; mu < 3; ++mu)
    for (int al = 0; al < 3; ++al)
      for (int be = al; be < 3; ++be)
        dh[mu][al][be] = dh[mu][be][al] =
            adapted_derivative(s, s.h_jet(al, be), mu + 1);

  for (int g = 0; g < 3; ++g)
    for (int al = 0; al < 3; ++al)
      for (int be = al; be < 3; ++be) {
        double sum = 0.0;
        for (int mu = 0; mu < 3; ++mu)
          sum += s.h_inv[g][mu] *
                 (dh[be][mu][al] + dh[al][mu][be] - dh[mu][al][be]);
        sc.gamma[g][al][be] = sc.gamma[g][be][al] = 0.5 * sum;
      }

  const double phi2 = s.phi.v * s.phi.v;
  const double psi2 = s.psi.v * s.psi.v;
  const Mat3 theta_up = raise_index(s.h_inv, k.theta);
  const Mat3 omega_up = raise_index(s.h_inv, k.omega);
  const Mat3 kappa_up = raise_index(s.h_inv, k.kappa);
  const Mat3 eta_up = raise_index(s.h_inv, k.eta);
  for (int g = 0; g < 3; ++g)
    for (int al = 0; al < 3; ++al) {
      sc.gamma_0[g][al] = theta_up[g][al] + phi2 * omega_up[g][al];
      sc.gamma_4[g][al] = kappa_up[g][al] - psi2 * eta_up[g][al];
    }
  return sc;
}

SpatialConnection spatial_connection(const ThreadedMetric& m, const Point5& p) {
  const MetricSample s = sample_fields(m, p);
  return spatial_connection(s, kinematic_sample(s));
}

LeviCivitaTable levi_civita_table(const MetricSample& s, const KinematicSample& k,
                                  const SpatialConnection& sc) {
  LeviCivitaTable t;

  const double phi2 = s.phi.v * s.phi.v;
  const double psi2 = s.psi.v * s.psi.v;
  const double inv_phi2 = 1.0 / phi2;
  const double inv_psi2 = 1.0 / psi2;

  const Vec3 a_up = raise_index(s.h_inv, k.a);
  const Vec3 b_up = raise_index(s.h_inv, k.b);
  const Vec3 c_up = raise_index(s.h_inv, k.c);
  const Vec3 d_up = raise_index(s.h_inv, k.d);
  const Vec3 phi_sp{k.phi_log[1], k.phi_log[2], k.phi_log[3]};
  const Vec3 psi_sp{k.psi_log[1], k.psi_log[2], k.psi_log[3]};
  const Vec3 phi_up = raise_index(s.h_inv, phi_sp);
  const Vec3 psi_up = raise_index(s.h_inv, psi_sp);

  for (int al = 0; al < 3; ++al) {
    for (int be = 0; be < 3; ++be) {
      LcRow& r = t.dd[al][be];
      for (int g = 0; g < 3; ++g) r.spatial[g] = sc.gamma[g][al][be];
      r.temporal = k.omega[al][be] + inv_phi2 * k.theta[al][be];
      r.vertical = k.eta[al][be] - inv_psi2 * k.kappa[al][be];
    }

    {
      LcRow& r = t.e0_d[al];
      for (int g = 0; g < 3; ++g) r.spatial[g] = sc.gamma_0[g][al];
      r.temporal = phi_sp[al] - k.b[al];
      r.vertical = 0.5 * (phi2 * k.d[al] * inv_psi2 - k.a[al]);
    }
    {
      LcRow& r = t.e4_d[al];
      for (int g = 0; g < 3; ++g) r.spatial[g] = sc.gamma_4[g][al];
      r.temporal = 0.5 * (psi2 * k.a[al] * inv_phi2 - k.d[al]);
      r.vertical = psi_sp[al] - k.c[al];
    }
    {
      LcRow& r = t.d_e0[al];
      for (int g = 0; g < 3; ++g) r.spatial[g] = sc.gamma_0[g][al];
      r.temporal = phi_sp[al];
      r.vertical = 0.5 * (phi2 * k.d[al] * inv_psi2 + k.a[al]);
    }
    {
      LcRow& r = t.d_e4[al];
      for (int g = 0; g < 3; ++g) r.spatial[g] = sc.gamma_4[g][al];
      r.temporal = 0.5 * (psi2 * k.a[al] * inv_phi2 + k.d[al]);
      r.vertical = psi_sp[al];
    }
  }

  for (int g = 0; g < 3; ++g) {
    const double mixed = 0.5 * (psi2 * a_up[g] - phi2 * d_up[g]);
    t.e4_e0.spatial[g] = mixed;
    t.e0_e4.spatial[g] = mixed;
    t.e0_e0.spatial[g] = phi2 * (phi_up[g] - b_up[g]);
    t.e4_e4.spatial[g] = psi2 * (c_up[g] - psi_up[g]);
  }
  t.e4_e0.temporal = k.phi4;
  t.e4_e0.vertical = k.psi_log[0] - k.a0;
  t.e0_e4.temporal = k.phi4;
  t.e0_e4.vertical = k.psi_log[0];
  t.e0_e0.temporal = k.phi_log[0];
  t.e0_e0.vertical = phi2 * k.phi4 * inv_psi2;
  t.e4_e4.temporal = psi2 * (k.psi_log[0] - k.a0) * inv_phi2;
  t.e4_e4.vertical = k.psi4;

  return t;
}

LeviCivitaTable levi_civita_table(const ThreadedMetric& m, const Point5& p) {
  const MetricSample s = sample_fields(m, p);
  const KinematicSample k = kinematic_sample(s);
  return levi_civita_table(s, k, spatial_connection(s, k));
}

ConnectionSample connection_sample(const ThreadedMetric& m, const Point5& p) {
  const MetricSample s = sample_fields(m, p);
  const KinematicSample k = kinematic_sample(s);
  ConnectionSample cs;
  cs.spatial = spatial_connection(s, k);
  cs.table = levi_civita_table(s, k, cs.spatial);
  return cs;
}

BracketCoefficients bracket_coefficients(const MetricSample& s, const KinematicSample& k) {
  (void)s;
  BracketCoefficients bc;
  bc.a = k.a;
  bc.b = k.b;
  bc.c = k.c;
  bc.d = k.d;
  bc.a0 = k.a0;
  bc.omega = k.omega;
  bc.eta = k.eta;
  return bc;
}

BracketCoefficients bracket_coefficients(const ThreadedMetric& m, const Point5& p) {
  const MetricSample s = sample_fields(m, p);
  return bracket_coefficients(s, kinematic_sample(s));
}

LcRow bracket_row(const BracketCoefficients& bc, int i, int j) {
  LcRow r;
  if (i == j) return r;

  // [spatial_alpha, temporal] = b_alpha temporal + a_alpha vertical
  if (i >= 1 && i <= 3 && j == 0) {
    r.temporal = bc.b[i - 1];
    r.vertical = bc.a[i - 1];
    return r;
  }
  // [temporal, vertical] = a0 vertical
  if (i == 0 && j == 4) {
    r.vertical = bc.a0;
    return r;
  }
  // [spatial_alpha, vertical] = d_alpha temporal + c_alpha vertical
  if (i >= 1 && i <= 3 && j == 4) {
    r.temporal = bc.d[i - 1];
    r.vertical = bc.c[i - 1];
    return r;
  }
  // [spatial_i, spatial_j] = 2 omega_{ji} temporal + 2 eta_{ji} vertical
  if (i >= 1 && i <= 3 && j >= 1 && j <= 3) {
    r.temporal = 2.0 * bc.omega[j - 1][i - 1];
    r.vertical = 2.0 * bc.eta[j - 1][i - 1];
    return r;
  }

  // Remaining cases are antisymmetric images of the ones above.
  r = bracket_row(bc, j, i);
  for (double& x : r.spatial) x = -x;
  r.temporal = -r.temporal;
  r.vertical = -r.vertical;
  return r;
}

LcRow table_row(const LeviCivitaTable& t, int i, int j) {
  const bool i_sp = i >= 1 && i <= 3;
  const bool j_sp = j >= 1 && j <= 3;
  if (i_sp && j_sp) return t.dd[j - 1][i - 1];
  if (i == 0 && j_sp) return t.e0_d[j - 1];
  if (i == 4 && j_sp) return t.e4_d[j - 1];
  if (i_sp && j == 0) return t.d_e0[i - 1];
  if (i_sp && j == 4) return t.d_e4[i - 1];
  if (i == 4 && j == 0) return t.e4_e0;
  if (i == 0 && j == 4) return t.e0_e4;
  if (i == 0 && j == 0) return t.e0_e0;
  return t.e4_e4;
}

namespace {

// Pairing of two frame fields under the assembled metric: the splitting is
// orthogonal, so only the three diagonal blocks are nonzero.
Jet5 frame_pairing(const MetricSample& s, int i, int j) {
  const bool i_sp = i >= 1 && i <= 3;
  const bool j_sp = j >= 1 && j <= 3;
  if (i == 0 && j == 0) return -(s.phi * s.phi);
  if (i == 4 && j == 4) return s.psi * s.psi;
  if (i_sp && j_sp) return s.h_jet(i - 1, j - 1);
  return Jet5::constant(0.0);
}

// Pairing of a decomposed vector with frame field k.
double row_pairing(const MetricSample& s, const LcRow& r, int k) {
  if (k == 0) return -r.temporal * s.phi.v * s.phi.v;
  if (k == 4) return r.vertical * s.psi.v * s.psi.v;
  double sum = 0.0;
  for (int g = 0; g < 3; ++g) sum += r.spatial[g] * s.h_value[g][k - 1];
  return sum;
}

} // namespace

Vec5 frame_field(const MetricSample& s, int i) {
  Vec5 v{};
  if (i == 0) {
    v[0] = 1.0;
    v[4] = -s.A[0].v;
  } else if (i >= 1 && i <= 3) {
    v[0] = -s.B[i - 1].v;
    v[i] = 1.0;
    v[4] = s.B[i - 1].v * s.A[0].v - s.A[i].v;
  } else {
    v[4] = 1.0;
  }
  return v;
}

Vec5 bracket_natural(const ThreadedMetric& m, const Point5& p, int i, int j) {
  const MetricSample s = sample_fields(m, p);
  const LcRow row = bracket_row(bracket_coefficients(s, kinematic_sample(s)), i, j);
  Vec5 out{};
  const Vec5 f0 = frame_field(s, 0);
  const Vec5 f4 = frame_field(s, 4);
  for (int a = 0; a < 5; ++a)
    out[a] = row.temporal * f0[a] + row.vertical * f4[a];
  for (int g = 0; g < 3; ++g) {
    const Vec5 fg = frame_field(s, g + 1);
    for (int a = 0; a < 5; ++a) out[a] += row.spatial[g] * fg[a];
  }
  return out;
}

namespace {

// Advances p along frame field i for flow parameter `time` (possibly
// negative) with 8 classical Runge-Kutta substeps.
Point5 flow_leg(const ThreadedMetric& m, Point5 p, int i, double time) {
  constexpr int kSubsteps = 8;
  const double h = time / kSubsteps;
  const auto f = [&](const Point5& x) { return frame_field(sample_fields(m, x), i); };
  const auto ax = [](const Point5& a, double c, const Vec5& b) {
    Point5 r;
    for (int k = 0; k < 5; ++k) r[k] = a[k] + c * b[k];
    return r;
  };
  for (int s = 0; s < kSubsteps; ++s) {
    const Vec5 k1 = f(p);
    const Vec5 k2 = f(ax(p, 0.5 * h, k1));
    const Vec5 k3 = f(ax(p, 0.5 * h, k2));
    const Vec5 k4 = f(ax(p, h, k3));
    for (int k = 0; k < 5; ++k)
      p[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  }
  return p;
}

// Commutator of the two flows: i forward, j forward, i back, j back.
Point5 flow_commutator(const ThreadedMetric& m, const Point5& p, int i, int j,
                       double h) {
  Point5 q = flow_leg(m, p, i, h);
  q = flow_leg(m, q, j, h);
  q = flow_leg(m, q, i, -h);
  return flow_leg(m, q, j, -h);
}

} // namespace

Vec5 bracket_flow_estimate(const ThreadedMetric& m, const Point5& p, int i, int j,
                           double h) {
  // The one-sided commutator defect is h^2 [F_i, F_j] + O(h^3); averaging
  // the +h and -h defects cancels the cubic term.
  const Point5 fwd = flow_commutator(m, p, i, j, h);
  const Point5 bwd = flow_commutator(m, p, i, j, -h);
  Vec5 out{};
  for (int a = 0; a < 5; ++a)
    out[a] = (fwd[a] + bwd[a] - 2.0 * p[a]) / (2.0 * h * h);
  return out;
}

ConnectionCheck verify_connection(const ThreadedMetric& m, const Point5& p) {
  const MetricSample s = sample_fields(m, p);
  const KinematicSample k = kinematic_sample(s);
  const SpatialConnection sc = spatial_connection(s, k);
  const LeviCivitaTable t = levi_civita_table(s, k, sc);
  const BracketCoefficients bc = bracket_coefficients(s, k);

  ConnectionCheck out;

  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const LcRow rij = table_row(t, i, j);
      const LcRow rji = table_row(t, j, i);
      const LcRow br = bracket_row(bc, i, j);
      for (int g = 0; g < 3; ++g)
        out.torsion_max = std::max(
            out.torsion_max, std::fabs(rij.spatial[g] - rji.spatial[g] - br.spatial[g]));
      out.torsion_max = std::max(
          out.torsion_max, std::fabs(rij.temporal - rji.temporal - br.temporal));
      out.torsion_max = std::max(
          out.torsion_max, std::fabs(rij.vertical - rji.vertical - br.vertical));
    }

  for (int x = 0; x < 5; ++x)
    for (int y = 0; y < 5; ++y)
      for (int z = y; z < 5; ++z) {
        const double lhs = adapted_derivative(s, frame_pairing(s, y, z), x);
        const double rhs =
            row_pairing(s, table_row(t, x, y), z) + row_pairing(s, table_row(t, x, z), y);
        out.compatibility_max = std::max(out.compatibility_max, std::fabs(lhs - rhs));
      }

  return out;
}

} // namespace thread5d
