#include "thread5d/classify.hpp"

#include <algorithm>
#include <cmath>

#include "thread5d/kinematics.hpp"

namespace thread5d {

namespace {

void require_samples(const Trajectory& traj) {
  if (traj.samples.empty()) throw ConfigError("trajectory has no samples");
}

// Visit every node of the region's rectangular grid. Single-count axes are
// pinned at min.
template <class Fn>
void for_each_node(const Region5& r, Fn&& fn) {
  for (int i = 0; i < 5; ++i) {
    if (r.grid[i] < 1) throw ConfigError("region grid counts must be positive");
    if (r.max[i] < r.min[i])
      throw ConfigError("region must satisfy max >= min on every axis");
  }
  std::array<int, 5> idx{};
  while (true) {
    Point5 p;
    for (int i = 0; i < 5; ++i)
      p[i] = r.grid[i] == 1
                 ? r.min[i]
                 : r.min[i] + (r.max[i] - r.min[i]) * idx[i] / (r.grid[i] - 1);
    fn(p);
    int axis = 4;
    while (axis >= 0 && ++idx[axis] == r.grid[axis]) idx[axis--] = 0;
    if (axis < 0) break;
  }
}

double quad_form(const Mat3& T, const Vec3& u) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s += T[a][b] * u[a] * u[b];
  return s;
}

// Spatial coordinate accelerations per sample. Trajectories that carry their
// producing right-hand side are differentiated through it; external ones are
// differenced on a uniform grid, which loses the two samples at each end.
std::vector<std::pair<std::size_t, Vec3>> spatial_accelerations(
    const ThreadedMetric& m, const Trajectory& traj) {
  const auto& s = traj.samples;
  std::vector<std::pair<std::size_t, Vec3>> acc;

  switch (traj.meta.kind) {
    case RhsKind::AdaptedDerived:
    case RhsKind::AdaptedAsPrinted: {
      const RhsVariant variant = traj.meta.kind == RhsKind::AdaptedDerived
                                     ? RhsVariant::Derived
                                     : RhsVariant::AsPrinted;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const StateDerivative d = rhs_adapted(m, s[i].state, variant);
        acc.emplace_back(i, d.du_spatial);
      }
      break;
    }
    case RhsKind::Oracle: {
      for (std::size_t i = 0; i < s.size(); ++i) {
        const MetricSample ms = sample_fields(m, s[i].state.point);
        const NaturalVelocity v = to_natural(ms, s[i].state.vel);
        const Christoffel5 G = christoffel_full(m, s[i].state.point);
        Vec3 a{};
        for (int g = 0; g < 3; ++g) {
          double sum = 0.0;
          for (int b = 0; b < 5; ++b)
            for (int c = 0; c < 5; ++c) sum += G[g + 1][b][c] * v[b] * v[c];
          a[g] = -sum;
        }
        acc.emplace_back(i, a);
      }
      break;
    }
    case RhsKind::External: {
      if (s.size() < 5)
        throw ConfigError(
            "external trajectory needs at least 5 samples for differencing");
      const double h = s[1].t - s[0].t;
      for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (std::fabs(s[i + 1].t - s[i].t - h) > 1e-9 * std::max(1.0, std::fabs(h)))
          throw ConfigError(
              "external trajectory must be uniformly spaced for differencing");
      for (std::size_t i = 2; i + 2 < s.size(); ++i) {
        Vec3 a{};
        for (int g = 0; g < 3; ++g) {
          const auto x = [&](std::size_t j) { return s[j].state.point[g + 1]; };
          a[g] = (-x(i - 2) + 16.0 * x(i - 1) - 30.0 * x(i) + 16.0 * x(i + 1) -
                  x(i + 2)) /
                 (12.0 * h * h);
        }
        acc.emplace_back(i, a);
      }
      break;
    }
  }
  return acc;
}

} // namespace

SpatialCheck is_spatial_curve(const Trajectory& traj, double tol) {
  require_samples(traj);
  SpatialCheck out;
  for (const auto& ts : traj.samples) {
    out.max_u0 = std::max(out.max_u0, std::fabs(ts.state.vel.u0));
    out.max_u4 = std::max(out.max_u4, std::fabs(ts.state.vel.u4));
    for (double u : ts.state.vel.spatial)
      out.speed_scale = std::max(out.speed_scale, std::fabs(u));
  }
  out.threshold = tol * (1.0 + out.speed_scale);
  out.is_spatial = out.max_u0 <= out.threshold && out.max_u4 <= out.threshold;
  return out;
}

SpatialResiduals spatial_geodesic_residuals(const ThreadedMetric& m,
                                            const Trajectory& traj) {
  require_samples(traj);
  SpatialResiduals out;

  for (const auto& ts : traj.samples) {
    const MetricSample s = sample_fields(m, ts.state.point);
    const KinematicSample k = kinematic_sample(s);
    const double qb = std::fabs(quad_form(k.theta, ts.state.vel.spatial));
    const double qc = std::fabs(quad_form(k.kappa, ts.state.vel.spatial));
    if (qb > out.res_b) {
      out.res_b = qb;
      out.t_res_b = ts.t;
    }
    if (qc > out.res_c) {
      out.res_c = qc;
      out.t_res_c = ts.t;
    }
  }

  for (const auto& [i, xdd] : spatial_accelerations(m, traj)) {
    const TrajectorySample& ts = traj.samples[i];
    const MetricSample s = sample_fields(m, ts.state.point);
    const KinematicSample k = kinematic_sample(s);
    const SpatialConnection sc = spatial_connection(s, k);
    for (int g = 0; g < 3; ++g) {
      double r = xdd[g];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          r += sc.gamma[g][a][b] * ts.state.vel.spatial[a] *
               ts.state.vel.spatial[b];
      if (std::fabs(r) > out.res_a) {
        out.res_a = std::fabs(r);
        out.t_res_a = ts.t;
      }
    }
    ++out.samples_used;
  }
  return out;
}

double autoparallel_residual(const ThreadedMetric& m, const Trajectory& traj) {
  return spatial_geodesic_residuals(m, traj).res_a;
}

BundleCheck killing_bundle_check(const ThreadedMetric& m, const Region5& region,
                                 double tol) {
  BundleCheck out;
  for_each_node(region, [&](const Point5& p) {
    const MetricSample s = sample_fields(m, p);
    const KinematicSample k = kinematic_sample(s);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (std::fabs(k.theta[a][b]) > out.theta_max) {
          out.theta_max = std::fabs(k.theta[a][b]);
          out.theta_argmax = p;
        }
        if (std::fabs(k.kappa[a][b]) > out.kappa_max) {
          out.kappa_max = std::fabs(k.kappa[a][b]);
          out.kappa_argmax = p;
        }
      }
    ++out.nodes;
  });
  out.holds = out.theta_max <= tol && out.kappa_max <= tol;
  return out;
}

namespace {

// One classical Runge-Kutta step of a small autonomous system.
template <std::size_t N, class Rhs>
std::array<double, N> rk4_step(Rhs&& rhs, const std::array<double, N>& y,
                               double h) {
  const auto ax = [](const std::array<double, N>& a, double c,
                     const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + c * b[i];
    return r;
  };
  const auto k1 = rhs(y);
  const auto k2 = rhs(ax(y, 0.5 * h, k1));
  const auto k3 = rhs(ax(y, 0.5 * h, k2));
  const auto k4 = rhs(ax(y, h, k3));
  std::array<double, N> out;
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

void finish_meta(Trajectory& traj, double step) {
  traj.meta.integrator = "rk4";
  traj.meta.step = step;
  traj.meta.kind = RhsKind::External;  // no full adapted RHS behind this curve
  const double norm0 = traj.samples.front().norm;
  for (const auto& ts : traj.samples)
    traj.meta.max_norm_drift =
        std::max(traj.meta.max_norm_drift, std::fabs(ts.norm - norm0));
}

} // namespace

LineFamilyResult temporal_geodesic(const ThreadedMetric& m, const Region5& region,
                                   double tol, const Point5& start, double rate,
                                   double t0, double t1, double step) {
  LineFamilyResult out;
  ConditionCheck c1{"Phi_4 = 0", 0.0, {}, false};
  ConditionCheck c2{"Phi_alpha = b_alpha", 0.0, {}, false};
  for_each_node(region, [&](const Point5& p) {
    const MetricSample s = sample_fields(m, p);
    const KinematicSample k = kinematic_sample(s);
    if (std::fabs(k.phi4) > c1.max_residual) {
      c1.max_residual = std::fabs(k.phi4);
      c1.argmax = p;
    }
    for (int a = 0; a < 3; ++a) {
      const double r = std::fabs(k.phi_log[a + 1] - k.b[a]);
      if (r > c2.max_residual) {
        c2.max_residual = r;
        c2.argmax = p;
      }
    }
  });
  c1.holds = c1.max_residual <= tol;
  c2.holds = c2.max_residual <= tol;
  out.conditions = {c1, c2};
  out.conditions_hold = c1.holds && c2.holds;
  if (!out.conditions_hold) return out;

  // Reduced system: y = (x0, x4, w) with the spatial coordinates frozen.
  const auto rhs = [&](const std::array<double, 3>& y) -> std::array<double, 3> {
    const Point5 p = {y[0], start[1], start[2], start[3], y[1]};
    const MetricSample s = sample_fields(m, p);
    const KinematicSample k = kinematic_sample(s);
    return {y[2], -s.A[0].v * y[2], -k.phi_log[0] * y[2] * y[2]};
  };

  std::array<double, 3> y = {start[0], start[4], rate};
  const std::vector<double> grid = rk4_grid(t0, t1, step);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) y = rk4_step(rhs, y, grid[i] - grid[i - 1]);
    TrajectorySample ts;
    ts.t = grid[i];
    ts.state.point = {y[0], start[1], start[2], start[3], y[1]};
    ts.state.vel = AdaptedVelocity{y[2], {0.0, 0.0, 0.0}, 0.0};
    ts.norm = adapted_norm(m, ts.state.point, ts.state.vel);
    out.line.samples.push_back(ts);
  }
  finish_meta(out.line, step);
  return out;
}

LineFamilyResult vertical_geodesic(const ThreadedMetric& m, const Region5& region,
                                   double tol, const Point5& start, double rate,
                                   double t0, double t1, double step) {
  LineFamilyResult out;
  ConditionCheck c1{"Psi_0 = a_0", 0.0, {}, false};
  ConditionCheck c2{"Psi_alpha = c_alpha", 0.0, {}, false};
  for_each_node(region, [&](const Point5& p) {
    const MetricSample s = sample_fields(m, p);
    const KinematicSample k = kinematic_sample(s);
    const double r0 = std::fabs(k.psi_log[0] - k.a0);
    if (r0 > c1.max_residual) {
      c1.max_residual = r0;
      c1.argmax = p;
    }
    for (int a = 0; a < 3; ++a) {
      const double r = std::fabs(k.psi_log[a + 1] - k.c[a]);
      if (r > c2.max_residual) {
        c2.max_residual = r;
        c2.argmax = p;
      }
    }
  });
  c1.holds = c1.max_residual <= tol;
  c2.holds = c2.max_residual <= tol;
  out.conditions = {c1, c2};
  out.conditions_hold = c1.holds && c2.holds;
  if (!out.conditions_hold) return out;

  // Reduced system: y = (x4, w) with x0..x3 frozen.
  const auto rhs = [&](const std::array<double, 2>& y) -> std::array<double, 2> {
    const Point5 p = {start[0], start[1], start[2], start[3], y[0]};
    const MetricSample s = sample_fields(m, p);
    const KinematicSample k = kinematic_sample(s);
    return {y[1], -k.psi4 * y[1] * y[1]};
  };

  std::array<double, 2> y = {start[4], rate};
  const std::vector<double> grid = rk4_grid(t0, t1, step);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0) y = rk4_step(rhs, y, grid[i] - grid[i - 1]);
    TrajectorySample ts;
    ts.t = grid[i];
    ts.state.point = {start[0], start[1], start[2], start[3], y[0]};
    ts.state.vel = AdaptedVelocity{0.0, {0.0, 0.0, 0.0}, y[1]};
    ts.norm = adapted_norm(m, ts.state.point, ts.state.vel);
    out.line.samples.push_back(ts);
  }
  finish_meta(out.line, step);
  return out;
}

std::vector<CriticalPoint> rw_critical_points(const Expr& f,
                                              const CriticalPointWindow& w) {
  const auto vars = f.free_variables();
  if (vars[1] || vars[2] || vars[3])
    throw ConfigError(
        "critical-point search requires a warping that depends only on x0 and x4");
  for (int i = 0; i < 2; ++i) {
    if (w.grid[i] < 1) throw ConfigError("critical-point grid counts must be positive");
    if (w.max[i] < w.min[i])
      throw ConfigError("critical-point window must satisfy max >= min");
  }

  const auto grad = [&f](double c, double k) -> std::array<double, 2> {
    const Jet5 j = f.eval_jet(Point5{c, 0.0, 0.0, 0.0, k});
    return {j.d[0], j.d[4]};
  };

  const double span0 = w.max[0] - w.min[0];
  const double span4 = w.max[1] - w.min[1];
  const double far = 10.0 * (1.0 + span0 + span4);
  constexpr double kJacStep = 1e-5;

  std::vector<CriticalPoint> found;
  const auto try_seed = [&](double c, double k) {
    try {
      for (int it = 0; it < 30; ++it) {
        const auto g = grad(c, k);
        if (std::max(std::fabs(g[0]), std::fabs(g[1])) <= 0.01 * w.tol) break;
        const auto gp0 = grad(c + kJacStep, k);
        const auto gm0 = grad(c - kJacStep, k);
        const auto gp4 = grad(c, k + kJacStep);
        const auto gm4 = grad(c, k - kJacStep);
        const double j00 = (gp0[0] - gm0[0]) / (2.0 * kJacStep);
        const double j01 = (gp4[0] - gm4[0]) / (2.0 * kJacStep);
        const double j10 = (gp0[1] - gm0[1]) / (2.0 * kJacStep);
        const double j11 = (gp4[1] - gm4[1]) / (2.0 * kJacStep);
        const double det = j00 * j11 - j01 * j10;
        if (std::fabs(det) < 1e-30) return;
        const double dc = -(j11 * g[0] - j01 * g[1]) / det;
        const double dk = -(-j10 * g[0] + j00 * g[1]) / det;
        c += dc;
        k += dk;
        if (std::fabs(c - 0.5 * (w.min[0] + w.max[0])) > far ||
            std::fabs(k - 0.5 * (w.min[1] + w.max[1])) > far)
          return;  // diverged well outside the window
      }
      const auto g = grad(c, k);
      const double res = std::max(std::fabs(g[0]), std::fabs(g[1]));
      constexpr double kMargin = 1e-9;
      if (res > w.tol) return;
      if (c < w.min[0] - kMargin || c > w.max[0] + kMargin) return;
      if (k < w.min[1] - kMargin || k > w.max[1] + kMargin) return;
      for (auto& cp : found)
        if (std::fabs(cp.x0 - c) <= 1e-6 && std::fabs(cp.x4 - k) <= 1e-6) {
          if (res < cp.residual) cp = {c, k, res};
          return;
        }
      found.push_back({c, k, res});
    } catch (const Error&) {
      // Seed wandered out of the expression's domain; abandon it.
    }
  };

  for (int i = 0; i < w.grid[0]; ++i)
    for (int j = 0; j < w.grid[1]; ++j) {
      const double c =
          w.grid[0] == 1 ? w.min[0] : w.min[0] + span0 * i / (w.grid[0] - 1);
      const double k =
          w.grid[1] == 1 ? w.min[1] : w.min[1] + span4 * j / (w.grid[1] - 1);
      try_seed(c, k);
    }

  std::sort(found.begin(), found.end(), [](const CriticalPoint& a,
                                           const CriticalPoint& b) {
    return a.x0 != b.x0 ? a.x0 < b.x0 : a.x4 < b.x4;
  });
  return found;
}

ClassificationReport classify_trajectory(const ThreadedMetric& m,
                                         const Trajectory& traj, double tol,
                                         const std::optional<Region5>& region) {
  ClassificationReport rep;
  rep.tol = tol;
  rep.samples = traj.samples.size();
  rep.spatial = is_spatial_curve(traj, tol);
  rep.residuals = spatial_geodesic_residuals(m, traj);

  // Residuals are quadratic in the velocity, so the acceptance threshold
  // carries the squared speed scale.
  const double v = rep.spatial.speed_scale;
  rep.curve_threshold = tol * (1.0 + v * v);
  rep.autoparallel = rep.spatial.is_spatial && rep.residuals.res_a <= rep.curve_threshold;
  rep.theta_null = rep.residuals.res_b <= rep.curve_threshold;
  rep.kappa_null = rep.residuals.res_c <= rep.curve_threshold;
  rep.spatial_geodesic = rep.autoparallel && rep.theta_null && rep.kappa_null;
  if (region) rep.bundle = killing_bundle_check(m, *region, tol);
  return rep;
}

} // namespace thread5d
