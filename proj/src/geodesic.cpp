#include "thread5d/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace thread5d {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

using State10 = std::array<double, 10>;

State10 pack(const GeodesicState& s) {
  return {s.point[0], s.point[1], s.point[2], s.point[3], s.point[4],
          s.vel.u0,   s.vel.spatial[0], s.vel.spatial[1], s.vel.spatial[2],
          s.vel.u4};
}

GeodesicState unpack(const State10& y) {
  GeodesicState s;
  s.point = {y[0], y[1], y[2], y[3], y[4]};
  s.vel.u0 = y[5];
  s.vel.spatial = {y[6], y[7], y[8]};
  s.vel.u4 = y[9];
  return s;
}

State10 axpy(const State10& y, double h, const State10& k) {
  State10 r;
  for (int i = 0; i < 10; ++i) r[i] = y[i] + h * k[i];
  return r;
}

void check_finite(const State10& y, double t) {
  for (double v : y)
    if (!std::isfinite(v))
      throw NumericError("state became non-finite at t=" + fmt17(t));
}

// Fixed-step classical Runge-Kutta over the shared emission grid; repeated
// runs emit identical rows. Emit receives every accepted (t, state).
template <class Rhs, class Emit>
void drive_rk4(Rhs&& rhs, double t0, double t1, double step, State10 y, Emit&& emit) {
  const std::vector<double> grid = rk4_grid(t0, t1, step);
  emit(grid.front(), y);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double h = grid[i + 1] - grid[i];
    const State10 k1 = rhs(t, y);
    const State10 k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const State10 k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const State10 k4 = rhs(t + h, axpy(y, h, k3));
    for (int j = 0; j < 10; ++j)
      y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    check_finite(y, grid[i + 1]);
    emit(grid[i + 1], y);
  }
}

// Fehlberg 4(5) pair with local extrapolation: the 5th-order solution is
// advanced, the 4th-order one only feeds the error estimate.
template <class Rhs, class Emit>
void drive_rkf45(Rhs&& rhs, double t0, double t1, double h0, double atol,
                 double rtol, State10 y, Emit&& emit) {
  static constexpr double a21 = 1.0 / 4.0;
  static constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
  static constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0,
                          a43 = 7296.0 / 2197.0;
  static constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0,
                          a54 = -845.0 / 4104.0;
  static constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0,
                          a64 = 1859.0 / 4104.0, a65 = -11.0 / 40.0;
  static constexpr double b4[6] = {25.0 / 216.0, 0.0, 1408.0 / 2565.0,
                                   2197.0 / 4104.0, -1.0 / 5.0, 0.0};
  static constexpr double b5[6] = {16.0 / 135.0,     0.0,        6656.0 / 12825.0,
                                   28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0};

  double t = t0;
  double h = std::min(h0, t1 - t0);
  emit(t, y);

  while (t < t1 - 1e-15 * (1.0 + std::fabs(t1))) {
    bool closing = false;
    if (h >= t1 - t) {
      h = t1 - t;
      closing = true;
    }

    const State10 k1 = rhs(t, y);
    const State10 k2 = rhs(t + 0.25 * h, axpy(y, h * a21, k1));
    State10 tmp = y;
    for (int i = 0; i < 10; ++i) tmp[i] += h * (a31 * k1[i] + a32 * k2[i]);
    const State10 k3 = rhs(t + 3.0 / 8.0 * h, tmp);
    tmp = y;
    for (int i = 0; i < 10; ++i)
      tmp[i] += h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    const State10 k4 = rhs(t + 12.0 / 13.0 * h, tmp);
    tmp = y;
    for (int i = 0; i < 10; ++i)
      tmp[i] += h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    const State10 k5 = rhs(t + h, tmp);
    tmp = y;
    for (int i = 0; i < 10; ++i)
      tmp[i] += h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                     a65 * k5[i]);
    const State10 k6 = rhs(t + 0.5 * h, tmp);

    const State10* ks[6] = {&k1, &k2, &k3, &k4, &k5, &k6};
    State10 y4 = y, y5 = y;
    for (int i = 0; i < 10; ++i)
      for (int s = 0; s < 6; ++s) {
        y4[i] += h * b4[s] * (*ks[s])[i];
        y5[i] += h * b5[s] * (*ks[s])[i];
      }

    double err_ratio = 0.0;
    for (int i = 0; i < 10; ++i) {
      const double scale = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
      err_ratio = std::max(err_ratio, std::fabs(y5[i] - y4[i]) / scale);
    }

    if (err_ratio <= 1.0) {
      y = y5;
      t = closing ? t1 : t + h;
      check_finite(y, t);
      emit(t, y);
    }

    const double factor =
        std::clamp(0.9 * std::pow(std::max(err_ratio, 1e-30), -0.2), 0.2, 5.0);
    h *= factor;
    if (h < 1e-14 * (1.0 + std::fabs(t)))
      throw NumericError("adaptive step collapsed at t=" + fmt17(t));
  }
}

struct RaisedKinematics {
  Vec3 a_up{}, b_up{}, c_up{}, d_up{}, phi_up{}, psi_up{};
};

RaisedKinematics raise_all(const MetricSample& s, const KinematicSample& k) {
  RaisedKinematics r;
  r.a_up = raise_index(s.h_inv, k.a);
  r.b_up = raise_index(s.h_inv, k.b);
  r.c_up = raise_index(s.h_inv, k.c);
  r.d_up = raise_index(s.h_inv, k.d);
  r.phi_up = raise_index(s.h_inv, Vec3{k.phi_log[1], k.phi_log[2], k.phi_log[3]});
  r.psi_up = raise_index(s.h_inv, Vec3{k.psi_log[1], k.psi_log[2], k.psi_log[3]});
  return r;
}

} // namespace

const char* variant_name(RhsVariant v) {
  return v == RhsVariant::Derived ? "derived" : "as-printed";
}

RhsVariant variant_from_name(const std::string& name) {
  if (name == "derived") return RhsVariant::Derived;
  if (name == "as-printed") return RhsVariant::AsPrinted;
  throw ConfigError("unknown rhs variant '" + name +
                    "' (expected derived or as-printed)");
}

std::vector<double> rk4_grid(double t0, double t1, double step) {
  if (!(t1 > t0)) throw ConfigError("integration span must have t1 > t0");
  if (!(step > 0.0)) throw ConfigError("integration step must be positive");
  const double span = t1 - t0;
  long n_full = static_cast<long>(std::floor(span / step + 1e-9));
  double rem = span - static_cast<double>(n_full) * step;
  if (n_full > 0 && rem < step * 1e-9) rem = 0.0;

  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n_full) + 2);
  grid.push_back(t0);
  for (long i = 1; i <= n_full; ++i)
    grid.push_back(t0 + static_cast<double>(i) * step);
  if (rem > 0.0)
    grid.push_back(t1);
  else
    grid.back() = t1;  // land exactly on the endpoint
  return grid;
}

AdaptedVelocity to_adapted(const MetricSample& s, const NaturalVelocity& v) {
  AdaptedVelocity u;
  u.spatial = {v[1], v[2], v[3]};
  u.u0 = v[0];
  for (int al = 0; al < 3; ++al) u.u0 += s.B[al].v * v[al + 1];
  u.u4 = v[4] + s.A[0].v * v[0];
  for (int al = 0; al < 3; ++al) u.u4 += s.A[al + 1].v * v[al + 1];
  return u;
}

NaturalVelocity to_natural(const MetricSample& s, const AdaptedVelocity& u) {
  NaturalVelocity v{};
  v[1] = u.spatial[0];
  v[2] = u.spatial[1];
  v[3] = u.spatial[2];
  v[0] = u.u0;
  for (int al = 0; al < 3; ++al) v[0] -= s.B[al].v * u.spatial[al];
  v[4] = u.u4 - s.A[0].v * v[0];
  for (int al = 0; al < 3; ++al) v[4] -= s.A[al + 1].v * u.spatial[al];
  return v;
}

StateDerivative rhs_adapted(const ThreadedMetric& m, const GeodesicState& st,
                            RhsVariant variant) {
  const MetricSample s = sample_fields(m, st.point);
  const KinematicSample k = kinematic_sample(s);
  const SpatialConnection sc = spatial_connection(s, k);
  const RaisedKinematics up = raise_all(s, k);

  const double phi2 = s.phi.v * s.phi.v;
  const double psi2 = s.psi.v * s.psi.v;
  const double u0 = st.vel.u0;
  const double u4 = st.vel.u4;
  const Vec3& u = st.vel.spatial;

  StateDerivative out;
  const NaturalVelocity v = to_natural(s, st.vel);
  for (int i = 0; i < 5; ++i) out.dpoint[i] = v[i];

  // Spatial equations.
  for (int g = 0; g < 3; ++g) {
    double acc = 0.0;
    for (int al = 0; al < 3; ++al) {
      for (int be = 0; be < 3; ++be) acc += sc.gamma[g][al][be] * u[al] * u[be];
      acc += 2.0 * sc.gamma_0[g][al] * u[al] * u0;
      acc += 2.0 * sc.gamma_4[g][al] * u[al] * u4;
    }
    acc += (psi2 * up.a_up[g] - phi2 * up.d_up[g]) * u0 * u4;
    acc += phi2 * (up.phi_up[g] - up.b_up[g]) * u0 * u0;
    acc += psi2 * (up.c_up[g] - up.psi_up[g]) * u4 * u4;
    out.du_spatial[g] = -acc;
  }

  // Temporal equation. The (u4)^2 coefficient is the contested one: the
  // derived form divides by Phi^2 (consistent with the covariant-derivative
  // table), the as-printed form does not.
  {
    double acc = 0.0;
    for (int al = 0; al < 3; ++al) {
      for (int be = 0; be < 3; ++be)
        acc += k.theta[al][be] / phi2 * u[al] * u[be];
      acc += (2.0 * k.phi_log[al + 1] - k.b[al]) * u[al] * u0;
      acc += psi2 * k.a[al] / phi2 * u[al] * u4;
    }
    acc += 2.0 * k.phi4 * u0 * u4;
    acc += k.phi_log[0] * u0 * u0;
    const double cb = variant == RhsVariant::Derived
                          ? psi2 * (k.psi_log[0] - k.a0) / phi2
                          : psi2 * (k.psi_log[0] - k.a0);
    acc += cb * u4 * u4;
    out.du0 = -acc;
  }

  // Vertical equation.
  {
    double acc = 0.0;
    for (int al = 0; al < 3; ++al) {
      for (int be = 0; be < 3; ++be)
        acc += -k.kappa[al][be] / psi2 * u[al] * u[be];
      acc += phi2 * k.d[al] / psi2 * u[al] * u0;
      acc += (2.0 * k.psi_log[al + 1] - k.c[al]) * u[al] * u4;
    }
    acc += (2.0 * k.psi_log[0] - k.a0) * u0 * u4;
    acc += phi2 * k.phi4 / psi2 * u0 * u0;
    acc += k.psi4 * u4 * u4;
    out.du4 = -acc;
  }

  return out;
}

Christoffel5 christoffel_full(const ThreadedMetric& m, const Point5& p) {
  const FullMetricSample F = assemble_full_metric(m, p);
  const Mat5 ginv = inverse5(F.value());

  Christoffel5 G{};
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = b; c < 5; ++c) {
        double sum = 0.0;
        for (int d = 0; d < 5; ++d)
          sum += ginv[a][d] *
                 (F.g[d][c].d[b] + F.g[b][d].d[c] - F.g[b][c].d[d]);
        G[a][b][c] = G[a][c][b] = 0.5 * sum;
      }
  return G;
}

namespace {

Trajectory run_driver(const ThreadedMetric& m, const GeodesicState& s0, double t0,
                      double t1, const IntegratorOptions& opts, bool oracle) {
  if (!(t1 > t0)) throw ConfigError("integration span must have t1 > t0");

  Trajectory traj;
  traj.meta.integrator = opts.kind == IntegratorOptions::Kind::Rk4 ? "rk4" : "rkf45";
  traj.meta.step = opts.step;
  traj.meta.abs_tol = opts.abs_tol;
  traj.meta.rel_tol = opts.rel_tol;
  traj.meta.kind = oracle ? RhsKind::Oracle
                  : opts.variant == RhsVariant::Derived ? RhsKind::AdaptedDerived
                                                        : RhsKind::AdaptedAsPrinted;

  // The adapted system evolves (point, adapted velocity); the oracle evolves
  // (point, natural velocity) and converts only when emitting samples.
  State10 y0;
  if (oracle) {
    const MetricSample s = sample_fields(m, s0.point);
    const NaturalVelocity v = to_natural(s, s0.vel);
    y0 = {s0.point[0], s0.point[1], s0.point[2], s0.point[3], s0.point[4],
          v[0], v[1], v[2], v[3], v[4]};
  } else {
    y0 = pack(s0);
  }

  auto rhs_oracle = [&m](double, const State10& y) -> State10 {
    const Point5 p = {y[0], y[1], y[2], y[3], y[4]};
    const Christoffel5 G = christoffel_full(m, p);
    State10 dy{};
    for (int i = 0; i < 5; ++i) dy[i] = y[5 + i];
    for (int a = 0; a < 5; ++a) {
      double acc = 0.0;
      for (int b = 0; b < 5; ++b)
        for (int c = 0; c < 5; ++c) acc += G[a][b][c] * y[5 + b] * y[5 + c];
      dy[5 + a] = -acc;
    }
    return dy;
  };

  auto rhs_threaded = [&m, &opts](double, const State10& y) -> State10 {
    const StateDerivative d = rhs_adapted(m, unpack(y), opts.variant);
    return {d.dpoint[0], d.dpoint[1], d.dpoint[2], d.dpoint[3], d.dpoint[4],
            d.du0, d.du_spatial[0], d.du_spatial[1], d.du_spatial[2], d.du4};
  };

  auto emit = [&](double t, const State10& y) {
    TrajectorySample ts;
    ts.t = t;
    if (oracle) {
      const Point5 p = {y[0], y[1], y[2], y[3], y[4]};
      const MetricSample s = sample_fields(m, p);
      ts.state.point = p;
      ts.state.vel = to_adapted(s, NaturalVelocity{y[5], y[6], y[7], y[8], y[9]});
      ts.norm = adapted_norm(s, ts.state.vel);
    } else {
      ts.state = unpack(y);
      ts.norm = adapted_norm(m, ts.state.point, ts.state.vel);
    }
    traj.samples.push_back(ts);
  };

  double last_good_t = t0;
  try {
    auto emit_tracking = [&](double t, const State10& y) {
      emit(t, y);
      last_good_t = t;
    };
    if (opts.kind == IntegratorOptions::Kind::Rk4) {
      if (oracle)
        drive_rk4(rhs_oracle, t0, t1, opts.step, y0, emit_tracking);
      else
        drive_rk4(rhs_threaded, t0, t1, opts.step, y0, emit_tracking);
    } else {
      if (oracle)
        drive_rkf45(rhs_oracle, t0, t1, opts.step, opts.abs_tol, opts.rel_tol, y0,
                    emit_tracking);
      else
        drive_rkf45(rhs_threaded, t0, t1, opts.step, opts.abs_tol, opts.rel_tol,
                    y0, emit_tracking);
    }
  } catch (const NumericError& e) {
    throw NumericError("integration aborted (last good t=" + fmt17(last_good_t) +
                       "): " + e.what());
  } catch (const EvalDomainError& e) {
    throw NumericError("integration aborted (last good t=" + fmt17(last_good_t) +
                       "): " + e.what());
  }

  const double norm0 = traj.samples.front().norm;
  double drift = 0.0;
  for (const auto& ts : traj.samples)
    drift = std::max(drift, std::fabs(ts.norm - norm0));
  traj.meta.max_norm_drift = drift;
  return traj;
}

} // namespace

Trajectory integrate(const ThreadedMetric& m, const GeodesicState& s0, double t0,
                     double t1, const IntegratorOptions& opts) {
  return run_driver(m, s0, t0, t1, opts, /*oracle=*/false);
}

Trajectory integrate_oracle(const ThreadedMetric& m, const GeodesicState& s0,
                            double t0, double t1, const IntegratorOptions& opts) {
  return run_driver(m, s0, t0, t1, opts, /*oracle=*/true);
}

static const char kCsvHeader[] = "t,x0,x1,x2,x3,x4,u0,u1,u2,u3,u4,norm";

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << kCsvHeader << "\n";
  for (const auto& ts : traj.samples) {
    const GeodesicState& s = ts.state;
    os << fmt17(ts.t);
    for (int i = 0; i < 5; ++i) os << ',' << fmt17(s.point[i]);
    os << ',' << fmt17(s.vel.u0);
    for (int i = 0; i < 3; ++i) os << ',' << fmt17(s.vel.spatial[i]);
    os << ',' << fmt17(s.vel.u4);
    os << ',' << fmt17(ts.norm) << "\n";
  }
}

Trajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("trajectory CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw ConfigError(std::string("trajectory CSV header must be '") + kCsvHeader +
                      "'");

  Trajectory traj;
  traj.meta.integrator = "external";
  traj.meta.kind = RhsKind::External;

  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::array<double, 12> vals{};
    std::stringstream ss(line);
    std::string cell;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= 12)
        throw ConfigError("trajectory CSV row " + std::to_string(row) +
                          " has more than 12 columns");
      try {
        std::size_t used = 0;
        vals[col] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("trajectory CSV row " + std::to_string(row) +
                          ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != 12)
      throw ConfigError("trajectory CSV row " + std::to_string(row) +
                        " has " + std::to_string(col) + " columns, expected 12");

    TrajectorySample ts;
    ts.t = vals[0];
    ts.state.point = {vals[1], vals[2], vals[3], vals[4], vals[5]};
    ts.state.vel.u0 = vals[6];
    ts.state.vel.spatial = {vals[7], vals[8], vals[9]};
    ts.state.vel.u4 = vals[10];
    ts.norm = vals[11];
    if (!traj.samples.empty() && !(ts.t > traj.samples.back().t))
      throw ConfigError("trajectory CSV row " + std::to_string(row) +
                        ": t must be strictly increasing");
    traj.samples.push_back(ts);
  }
  if (traj.samples.empty())
    throw ConfigError("trajectory CSV has no data rows");

  const double norm0 = traj.samples.front().norm;
  for (const auto& ts : traj.samples)
    traj.meta.max_norm_drift =
        std::max(traj.meta.max_norm_drift, std::fabs(ts.norm - norm0));
  return traj;
}

} // namespace thread5d
