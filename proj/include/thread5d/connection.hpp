#pragma once

#include "thread5d/kinematics.hpp"

namespace thread5d {

// Decomposition of a covariant derivative of one adapted frame field along
// another, in the adapted frame itself: spatial coefficients on the three
// spatial legs, plus the temporal and vertical leg coefficients.
struct LcRow {
  Vec3 spatial{};
  double temporal = 0.0;
  double vertical = 0.0;
};

// All 25 directional-derivative combinations of the five frame fields,
// grouped the way the table is usually read: spatial/spatial, the four
// mixed families, and the four temporal/vertical corners.
struct LeviCivitaTable {
  LcRow dd[3][3];    // cov. derivative of spatial leg alpha along spatial leg beta: [alpha][beta]
  LcRow e0_d[3];     // of spatial leg alpha along the temporal leg
  LcRow e4_d[3];     // of spatial leg alpha along the vertical leg
  LcRow d_e0[3];     // of the temporal leg along spatial leg alpha
  LcRow d_e4[3];     // of the vertical leg along spatial leg alpha
  LcRow e4_e0;       // of the temporal leg along the vertical leg
  LcRow e0_e4;       // of the vertical leg along the temporal leg
  LcRow e0_e0;
  LcRow e4_e4;
};

// Christoffel-like symbols of the spatial 3-metric taken with adapted
// derivatives, plus the mixed temporal/vertical blocks built from the
// raised expansion and vorticity tensors.
struct SpatialConnection {
  double gamma[3][3][3] = {};  // [gamma][alpha][beta], symmetric in alpha,beta
  Mat3 gamma_0{};              // [gamma][alpha]
  Mat3 gamma_4{};              // [gamma][alpha]
};

// Coefficients of the frame-field Lie brackets, arranged per the four
// bracket families (spatial/temporal, temporal/vertical, spatial/vertical,
// spatial/spatial).
struct BracketCoefficients {
  Vec3 a{}, b{}, c{}, d{};
  double a0 = 0.0;
  Mat3 omega{}, eta{};
};

struct ConnectionSample {
  SpatialConnection spatial;
  LeviCivitaTable table;
};

SpatialConnection spatial_connection(const MetricSample& s, const KinematicSample& k);
SpatialConnection spatial_connection(const ThreadedMetric& m, const Point5& p);

LeviCivitaTable levi_civita_table(const MetricSample& s, const KinematicSample& k,
                                  const SpatialConnection& sc);
LeviCivitaTable levi_civita_table(const ThreadedMetric& m, const Point5& p);

ConnectionSample connection_sample(const ThreadedMetric& m, const Point5& p);

BracketCoefficients bracket_coefficients(const MetricSample& s, const KinematicSample& k);
BracketCoefficients bracket_coefficients(const ThreadedMetric& m, const Point5& p);

// Frame fields are indexed 0..4: 0 temporal, 1..3 spatial, 4 vertical.
// Returns the coefficients of [F_i, F_j] as an LcRow.
LcRow bracket_row(const BracketCoefficients& bc, int i, int j);

// Covariant derivative of frame field j along frame field i, from the table.
LcRow table_row(const LeviCivitaTable& t, int i, int j);

// Natural components of the adapted frame field with index i at a sampled
// point: temporal (1, 0, 0, 0, -A0), spatial leg a (-B_a, e_a, B_a A0 - A_a),
// vertical (0, 0, 0, 0, 1).
Vec5 frame_field(const MetricSample& s, int i);

// Closed-form bracket [F_i, F_j] resolved into natural components at p.
Vec5 bracket_natural(const ThreadedMetric& m, const Point5& p, int i, int j);

// Independent finite-difference estimate of the same bracket: composes the
// two frame flows forward and back over parameter h (and over -h) and takes
// the symmetric second difference of the end points, accurate to O(h^2).
// Each flow leg is integrated finely enough that its own error is
// negligible against the h^2 term.
Vec5 bracket_flow_estimate(const ThreadedMetric& m, const Point5& p, int i, int j,
                           double h);

// Self-verification at one point: worst torsion residual over all frame
// pairs (cov. derivative antisymmetrization minus the bracket) and worst
// metric-compatibility residual over all frame triples (derivative of the
// pairing minus the two connection terms, with every derivative from jets).
struct ConnectionCheck {
  double torsion_max = 0.0;
  double compatibility_max = 0.0;
};

ConnectionCheck verify_connection(const ThreadedMetric& m, const Point5& p);

} // namespace thread5d
