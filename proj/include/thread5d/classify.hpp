#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "thread5d/geodesic.hpp"

namespace thread5d {

// Axis-aligned sampling box with per-axis node counts. An axis with a single
// node is pinned at its min.
struct Region5 {
  Point5 min{};
  Point5 max{};
  std::array<int, 5> grid{3, 3, 3, 3, 3};
};

//--- curve classification -------------------------------------------------

// A curve is spatial when its temporal and vertical adapted velocities
// vanish along it; the threshold scales with the spatial speed.
struct SpatialCheck {
  bool is_spatial = false;
  double max_u0 = 0.0;
  double max_u4 = 0.0;
  double speed_scale = 0.0;  // max |u_spatial| component over the samples
  double threshold = 0.0;    // tol * (1 + speed_scale)
};

SpatialCheck is_spatial_curve(const Trajectory& traj, double tol);

// Worst residuals along the curve of the three membership equations:
//   res_a: d2x^g/dt2 + Gamma^g_{ab} u^a u^b   (spatial connection of h)
//   res_b: Theta_{ab} u^a u^b
//   res_c: K_{ab} u^a u^b
// Second derivatives come from the producing right-hand side when the
// trajectory records one, and from 4th-order central differences (needing
// at least 5 uniformly spaced samples) for external trajectories.
struct SpatialResiduals {
  double res_a = 0.0;
  double res_b = 0.0;
  double res_c = 0.0;
  double t_res_a = 0.0;  // sample times where each worst case occurred
  double t_res_b = 0.0;
  double t_res_c = 0.0;
  std::size_t samples_used = 0;
};

SpatialResiduals spatial_geodesic_residuals(const ThreadedMetric& m,
                                            const Trajectory& traj);
double autoparallel_residual(const ThreadedMetric& m, const Trajectory& traj);

//--- region checks ----------------------------------------------------------

// Scan for vanishing expansion tensors: when both Theta and K are zero on
// the region, every spatial autoparallel there is a geodesic of the full
// space and vice versa.
struct BundleCheck {
  bool holds = false;
  double theta_max = 0.0;
  double kappa_max = 0.0;
  Point5 theta_argmax{};
  Point5 kappa_argmax{};
  std::size_t nodes = 0;
};

BundleCheck killing_bundle_check(const ThreadedMetric& m, const Region5& region,
                                 double tol);

// One pointwise field condition certified over a sampling grid.
struct ConditionCheck {
  std::string name;
  double max_residual = 0.0;
  Point5 argmax{};
  bool holds = false;
};

// Certificate plus construction for a coordinate-line geodesic family. The
// field conditions are certified on the region grid; when they hold, the
// reduced equation is integrated from `start` and the resulting curve is
// returned with the frozen coordinates held exactly.
struct LineFamilyResult {
  bool conditions_hold = false;
  std::vector<ConditionCheck> conditions;
  Trajectory line;  // empty unless conditions_hold
};

// Temporal family: requires the vertical log-derivative of Phi to vanish and
// the spatial log-gradient of Phi to equal the temporal curvature b on the
// grid; then solves x0'' + Phi_0 (x0')^2 = 0, x4' = -A0 x0' with the spatial
// coordinates frozen at start[1..3]. `rate` is dx0/dt at t0.
LineFamilyResult temporal_geodesic(const ThreadedMetric& m, const Region5& region,
                                   double tol, const Point5& start, double rate,
                                   double t0, double t1, double step);

// Vertical family: requires the temporal log-derivative of Psi to equal a0
// and the spatial log-gradient of Psi to equal c on the grid; then solves
// x4'' + Psi_4 (x4')^2 = 0 with x0..x3 frozen. `rate` is dx4/dt at t0.
LineFamilyResult vertical_geodesic(const ThreadedMetric& m, const Region5& region,
                                   double tol, const Point5& start, double rate,
                                   double t0, double t1, double step);

//--- warped-product critical points ----------------------------------------

// Zeros of the warping gradient in the (x0, x4) plane. At such a point the
// leaf {x0=c, x4=k} carries its spatial geodesics as geodesics of the full
// space.
struct CriticalPoint {
  double x0 = 0.0;
  double x4 = 0.0;
  double residual = 0.0;  // max(|d0 f|, |d4 f|) at the accepted point
};

struct CriticalPointWindow {
  std::array<double, 2> min{};
  std::array<double, 2> max{};
  std::array<int, 2> grid{41, 41};
  double tol = 1e-10;
};

// Newton refinement seeded from every window grid node; the gradient comes
// from jets and its Jacobian from central differences. Results inside the
// window (with a small margin) are deduplicated and sorted by (x0, x4).
// Requires f to depend only on x0 and x4.
std::vector<CriticalPoint> rw_critical_points(const Expr& f,
                                              const CriticalPointWindow& window);

//--- report -----------------------------------------------------------------

struct ClassificationReport {
  double tol = 0.0;
  double curve_threshold = 0.0;  // tol * (1 + speed_scale^2), quadratic forms
  std::size_t samples = 0;
  SpatialCheck spatial;
  SpatialResiduals residuals;
  bool autoparallel = false;
  bool theta_null = false;
  bool kappa_null = false;
  bool spatial_geodesic = false;  // = autoparallel && theta_null && kappa_null
  std::optional<BundleCheck> bundle;
};

ClassificationReport classify_trajectory(const ThreadedMetric& m,
                                         const Trajectory& traj, double tol,
                                         const std::optional<Region5>& region);

} // namespace thread5d
