#include "thread5d/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "thread5d/json_io.hpp"
#include "thread5d/scenario.hpp"

namespace thread5d::cli {

namespace {

using nlohmann::ordered_json;

Point5 parse_point_flag(const std::string& text) {
  Point5 p{};
  std::stringstream ss(text);
  std::string cell;
  int n = 0;
  while (std::getline(ss, cell, ',')) {
    if (n >= 5)
      throw ConfigError("--point needs exactly 5 comma-separated numbers");
    try {
      std::size_t used = 0;
      p[n] = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("--point: bad number '" + cell + "'");
    }
    ++n;
  }
  if (n != 5)
    throw ConfigError("--point needs exactly 5 comma-separated numbers");
  return p;
}

void emit_text(const std::string& text, const std::string& out_path,
               std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + out_path + "'");
  f << text;
}

// Option set shared by the subcommands; each flag records whether it was
// given so scenario values are only overridden explicitly.
struct SubOpts {
  std::string config;
  std::string point_text;
  std::string out_path;
  std::string trajectory;
  std::string integrator_name;
  std::string variant;
  double t0 = 0.0, t1 = 0.0, step = 0.0, tol = 0.0;
  CLI::Option* o_point = nullptr;
  CLI::Option* o_t0 = nullptr;
  CLI::Option* o_t1 = nullptr;
  CLI::Option* o_step = nullptr;
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_integrator = nullptr;
  CLI::Option* o_variant = nullptr;
};

void add_config_flag(CLI::App* sub, SubOpts& o) {
  sub->add_option("--config", o.config, "Scenario JSON file")->required();
}

void add_point_flag(CLI::App* sub, SubOpts& o) {
  o.o_point = sub->add_option("--point", o.point_text,
                              "Evaluation point c0,c1,c2,c3,c4")
                  ->required();
}

void add_out_flag(CLI::App* sub, SubOpts& o) {
  sub->add_option("--out", o.out_path, "Output file (default: stdout)");
}

void add_integration_flags(CLI::App* sub, SubOpts& o) {
  o.o_t0 = sub->add_option("--t0", o.t0, "Start of the parameter span");
  o.o_t1 = sub->add_option("--t1", o.t1, "End of the parameter span");
  o.o_step = sub->add_option("--step", o.step, "rk4 step / rkf45 initial step");
  o.o_tol = sub->add_option("--tol", o.tol, "rkf45 absolute and relative tolerance");
  o.o_integrator =
      sub->add_option("--integrator", o.integrator_name, "rk4 or rkf45")
          ->check(CLI::IsMember({"rk4", "rkf45"}));
  o.o_variant = sub->add_option("--variant", o.variant,
                                "Temporal-equation variant: derived or as-printed")
                    ->check(CLI::IsMember({"derived", "as-printed"}));
}

void apply_integration_overrides(Scenario& sc, const SubOpts& o) {
  if (o.o_t0 && o.o_t0->count()) sc.t0 = o.t0;
  if (o.o_t1 && o.o_t1->count()) sc.t1 = o.t1;
  if (o.o_step && o.o_step->count()) sc.integrator.step = o.step;
  if (o.o_tol && o.o_tol->count())
    sc.integrator.abs_tol = sc.integrator.rel_tol = o.tol;
  if (o.o_integrator && o.o_integrator->count())
    sc.integrator.kind = o.integrator_name == "rk4" ? IntegratorOptions::Kind::Rk4
                                                    : IntegratorOptions::Kind::Rkf45;
  if (o.o_variant && o.o_variant->count())
    sc.integrator.variant = variant_from_name(o.variant);
  if (!(sc.t1 > sc.t0)) throw ConfigError("span must have t1 > t0");
  if (!(sc.integrator.step > 0.0)) throw ConfigError("step must be positive");
  if (!(sc.integrator.abs_tol > 0.0) || !(sc.integrator.rel_tol > 0.0))
    throw ConfigError("tolerances must be positive");
}

//--- kinematics --------------------------------------------------------------

int run_kinematics(const SubOpts& o, std::ostream& out) {
  const Scenario sc = load_scenario(o.config);
  const ThreadedMetric m = build_metric(sc.metric);
  const Point5 p = parse_point_flag(o.point_text);
  const KinematicSample k = kinematic_sample(m, p);

  ordered_json doc;
  doc["point"] = json_point(p);
  doc["omega"] = json_mat3(k.omega);
  doc["eta"] = json_mat3(k.eta);
  doc["Theta"] = json_mat3(k.theta);
  doc["K"] = json_mat3(k.kappa);
  doc["Theta_trace"] = k.theta_trace;
  doc["K_trace"] = k.kappa_trace;
  doc["a"] = json_vec3(k.a);
  doc["b"] = json_vec3(k.b);
  doc["c"] = json_vec3(k.c);
  doc["d"] = json_vec3(k.d);
  doc["a0"] = k.a0;
  doc["Phi_log"] = ordered_json{k.phi_log[0], k.phi_log[1], k.phi_log[2],
                                k.phi_log[3], k.phi4};
  doc["Psi_log"] = ordered_json{k.psi_log[0], k.psi_log[1], k.psi_log[2],
                                k.psi_log[3], k.psi4};
  emit_text(dump17(doc), o.out_path, out);
  return 0;
}

//--- connection --------------------------------------------------------------

ordered_json json_lc_row(const LcRow& r) {
  ordered_json doc;
  doc["spatial"] = json_vec3(r.spatial);
  doc["temporal"] = r.temporal;
  doc["vertical"] = r.vertical;
  return doc;
}

int run_connection(const SubOpts& o, std::ostream& out) {
  const Scenario sc = load_scenario(o.config);
  const ThreadedMetric m = build_metric(sc.metric);
  const Point5 p = parse_point_flag(o.point_text);
  const ConnectionSample cs = connection_sample(m, p);

  ordered_json doc;
  doc["point"] = json_point(p);

  ordered_json gamma = ordered_json::array();
  for (int g = 0; g < 3; ++g) {
    ordered_json plane = ordered_json::array();
    for (int al = 0; al < 3; ++al) {
      ordered_json row = ordered_json::array();
      for (int be = 0; be < 3; ++be) row.push_back(cs.spatial.gamma[g][al][be]);
      plane.push_back(row);
    }
    gamma.push_back(plane);
  }
  doc["gamma_spatial"] = gamma;
  doc["gamma_0"] = json_mat3(cs.spatial.gamma_0);
  doc["gamma_4"] = json_mat3(cs.spatial.gamma_4);

  ordered_json table;
  ordered_json ss = ordered_json::array();
  for (int al = 0; al < 3; ++al) {
    ordered_json row = ordered_json::array();
    for (int be = 0; be < 3; ++be) row.push_back(json_lc_row(cs.table.dd[al][be]));
    ss.push_back(row);
  }
  table["spatial_spatial"] = ss;
  for (const auto& [key, rows] :
       std::initializer_list<std::pair<const char*, const LcRow*>>{
           {"spatial_along_temporal", cs.table.e0_d},
           {"spatial_along_vertical", cs.table.e4_d},
           {"temporal_along_spatial", cs.table.d_e0},
           {"vertical_along_spatial", cs.table.d_e4}}) {
    ordered_json arr = ordered_json::array();
    for (int al = 0; al < 3; ++al) arr.push_back(json_lc_row(rows[al]));
    table[key] = arr;
  }
  table["temporal_along_vertical"] = json_lc_row(cs.table.e4_e0);
  table["vertical_along_temporal"] = json_lc_row(cs.table.e0_e4);
  table["temporal_along_temporal"] = json_lc_row(cs.table.e0_e0);
  table["vertical_along_vertical"] = json_lc_row(cs.table.e4_e4);
  doc["lc_table"] = table;

  emit_text(dump17(doc), o.out_path, out);
  return 0;
}

//--- integrate ---------------------------------------------------------------

int run_integrate(const SubOpts& o, std::ostream& out) {
  Scenario sc = load_scenario(o.config);
  apply_integration_overrides(sc, o);
  const ThreadedMetric m = build_metric(sc.metric);
  const GeodesicState s0 = initial_state(m, sc);
  const Trajectory traj = integrate(m, s0, sc.t0, sc.t1, sc.integrator);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  emit_text(csv.str(), o.out_path, out);
  return 0;
}

//--- classify ----------------------------------------------------------------

int run_classify(const SubOpts& o, std::ostream& out) {
  Scenario sc = load_scenario(o.config);
  apply_integration_overrides(sc, o);
  const ThreadedMetric m = build_metric(sc.metric);

  Trajectory traj;
  if (!o.trajectory.empty()) {
    std::ifstream f(o.trajectory, std::ios::binary);
    if (!f) throw ConfigError("cannot open trajectory file '" + o.trajectory + "'");
    traj = read_trajectory_csv(f);
  } else {
    traj = integrate(m, initial_state(m, sc), sc.t0, sc.t1, sc.integrator);
  }

  const double tol = o.o_tol && o.o_tol->count() ? o.tol : sc.tolerance;
  if (!(tol > 0.0)) throw ConfigError("classification tolerance must be positive");
  const ClassificationReport rep = classify_trajectory(m, traj, tol, sc.region);

  ordered_json doc;
  doc["tolerance"] = rep.tol;
  doc["curve_threshold"] = rep.curve_threshold;
  doc["samples"] = rep.samples;
  {
    ordered_json sp;
    sp["is_spatial"] = rep.spatial.is_spatial;
    sp["max_u0"] = rep.spatial.max_u0;
    sp["max_u4"] = rep.spatial.max_u4;
    sp["speed_scale"] = rep.spatial.speed_scale;
    sp["threshold"] = rep.spatial.threshold;
    doc["spatial"] = sp;
  }
  {
    ordered_json rs;
    rs["autoparallel"] = rep.residuals.res_a;
    rs["theta"] = rep.residuals.res_b;
    rs["kappa"] = rep.residuals.res_c;
    rs["t_autoparallel"] = rep.residuals.t_res_a;
    rs["t_theta"] = rep.residuals.t_res_b;
    rs["t_kappa"] = rep.residuals.t_res_c;
    rs["samples_used"] = rep.residuals.samples_used;
    doc["residuals"] = rs;
  }
  {
    ordered_json v;
    v["spatial_curve"] = rep.spatial.is_spatial;
    v["autoparallel"] = rep.autoparallel;
    v["theta_null"] = rep.theta_null;
    v["kappa_null"] = rep.kappa_null;
    v["spatial_geodesic"] = rep.spatial_geodesic;
    doc["verdicts"] = v;
  }
  if (rep.bundle) {
    ordered_json b;
    b["holds"] = rep.bundle->holds;
    b["theta_max"] = rep.bundle->theta_max;
    b["kappa_max"] = rep.bundle->kappa_max;
    b["theta_argmax"] = json_point(rep.bundle->theta_argmax);
    b["kappa_argmax"] = json_point(rep.bundle->kappa_argmax);
    b["nodes"] = rep.bundle->nodes;
    doc["killing_bundle"] = b;
  }
  emit_text(dump17(doc), o.out_path, out);
  return rep.spatial_geodesic ? 0 : 1;
}

//--- critical-points ---------------------------------------------------------

int run_critical_points(const SubOpts& o, std::ostream& out) {
  const Scenario sc = load_scenario(o.config);
  const ThreadedMetric m = build_metric(sc.metric);
  if (!m.has_warping())
    throw ConfigError("critical-point search needs the warped-product family");
  if (!sc.window)
    throw ConfigError("scenario has no critical_points window");

  CriticalPointWindow w = *sc.window;
  if (o.o_tol && o.o_tol->count()) w.tol = o.tol;
  if (!(w.tol > 0.0)) throw ConfigError("critical-point tolerance must be positive");

  const std::vector<CriticalPoint> pts = rw_critical_points(m.warping(), w);

  ordered_json doc;
  {
    ordered_json win;
    win["min"] = ordered_json{w.min[0], w.min[1]};
    win["max"] = ordered_json{w.max[0], w.max[1]};
    win["grid"] = ordered_json{w.grid[0], w.grid[1]};
    win["tol"] = w.tol;
    doc["window"] = win;
  }
  ordered_json list = ordered_json::array();
  for (const auto& cp : pts) {
    ordered_json item;
    item["x0"] = cp.x0;
    item["x4"] = cp.x4;
    item["residual"] = cp.residual;
    list.push_back(item);
  }
  doc["critical_points"] = list;
  emit_text(dump17(doc), o.out_path, out);
  return 0;
}

//--- validate ----------------------------------------------------------------

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

double final_position_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (int i = 0; i < 5; ++i)
    gap = std::max(gap, std::fabs(a.samples.back().state.point[i] -
                                  b.samples.back().state.point[i]));
  return gap;
}

int run_validate(const SubOpts& o, std::ostream& out) {
  Scenario sc = load_scenario(o.config);
  apply_integration_overrides(sc, o);
  const ThreadedMetric m = build_metric(sc.metric);
  const GeodesicState s0 = initial_state(m, sc);

  constexpr double kOracleTol = 1e-6;
  constexpr double kDriftTol = 1e-8;
  constexpr double kConnTol = 1e-9;
  constexpr double kOrderMin = 1.9;
  constexpr double kBracketAbs = 1e-10;
  constexpr double kBracketH = 0.02;

  std::vector<CheckLine> lines;

  IntegratorOptions opts = sc.integrator;
  opts.variant = RhsVariant::Derived;
  const Trajectory traj = integrate(m, s0, sc.t0, sc.t1, opts);
  const Trajectory oracle = integrate_oracle(m, s0, sc.t0, sc.t1, opts);

  const double gap_derived = final_position_gap(traj, oracle);
  lines.push_back({"oracle-equivalence", gap_derived <= kOracleTol,
                   "max final-coordinate error " + fmt17(gap_derived) + " (tol " +
                       fmt17(kOracleTol) + ")"});

  const double norm0 = traj.samples.front().norm;
  const double drift_tol = kDriftTol * (1.0 + std::fabs(norm0));
  lines.push_back({"norm-drift", traj.meta.max_norm_drift <= drift_tol,
                   "max drift " + fmt17(traj.meta.max_norm_drift) + " (tol " +
                       fmt17(drift_tol) + ")"});

  // Torsion and metric compatibility at 20 points spread along the curve.
  double torsion_max = 0.0, compat_max = 0.0;
  const std::size_t n = traj.samples.size();
  for (int i = 0; i < 20; ++i) {
    const std::size_t idx = n <= 1 ? 0 : i * (n - 1) / 19;
    const ConnectionCheck chk = verify_connection(m, traj.samples[idx].state.point);
    torsion_max = std::max(torsion_max, chk.torsion_max);
    compat_max = std::max(compat_max, chk.compatibility_max);
  }
  lines.push_back({"torsion-free", torsion_max <= kConnTol,
                   "max residual " + fmt17(torsion_max) + " (tol " +
                       fmt17(kConnTol) + ")"});
  lines.push_back({"metric-compatibility", compat_max <= kConnTol,
                   "max residual " + fmt17(compat_max) + " (tol " +
                       fmt17(kConnTol) + ")"});

  // Flow-commutator convergence toward the closed-form brackets, all ten
  // frame pairs at three points of the curve. Pairs whose bracket is zero
  // to rounding pass on magnitude instead of order.
  double min_order = 1e30;
  bool order_ok = true;
  bool any_order = false;
  for (const std::size_t idx : {std::size_t{0}, n / 2, n - 1}) {
    const Point5& p = traj.samples[idx].state.point;
    for (int i = 0; i < 5; ++i)
      for (int j = i + 1; j < 5; ++j) {
        const Vec5 closed = bracket_natural(m, p, i, j);
        const auto err_at = [&](double h) {
          const Vec5 est = bracket_flow_estimate(m, p, i, j, h);
          double e = 0.0;
          for (int a = 0; a < 5; ++a) e = std::max(e, std::fabs(est[a] - closed[a]));
          return e;
        };
        const double e1 = err_at(kBracketH);
        const double e2 = err_at(kBracketH / 2.0);
        if (std::max(e1, e2) <= kBracketAbs) continue;
        any_order = true;
        const double order = std::log2(e1 / e2);
        min_order = std::min(min_order, order);
        order_ok = order_ok && order >= kOrderMin;
      }
  }
  lines.push_back({"bracket-convergence", order_ok,
                   any_order ? "min observed order " + fmt17(min_order) +
                                   " (threshold " + fmt17(kOrderMin) + ")"
                             : "all brackets below " + fmt17(kBracketAbs)});

  // Which temporal-equation variant tracks the oracle.
  double gap_as_printed = std::numeric_limits<double>::infinity();
  try {
    IntegratorOptions ap = opts;
    ap.variant = RhsVariant::AsPrinted;
    gap_as_printed = final_position_gap(integrate(m, s0, sc.t0, sc.t1, ap), oracle);
  } catch (const Error&) {
    // A diverging as-printed run still identifies the derived variant.
  }
  const bool match_derived = gap_derived <= kOracleTol;
  const bool match_as_printed = gap_as_printed <= kOracleTol;
  std::string match = match_derived && match_as_printed ? "both"
                      : match_derived                   ? "derived"
                      : match_as_printed                ? "as-printed"
                                                        : "none";

  bool all_pass = true;
  std::ostringstream table;
  table << std::left << std::setw(22) << "check" << std::setw(8) << "result"
        << "detail\n";
  for (const auto& line : lines) {
    all_pass = all_pass && line.pass;
    table << std::left << std::setw(22) << line.name << std::setw(8)
          << (line.pass ? "pass" : "FAIL") << line.detail << "\n";
  }
  table << "variant-match: " << match << " (derived " << fmt17(gap_derived)
        << ", as-printed " << fmt17(gap_as_printed) << ", tol "
        << fmt17(kOracleTol) << ")\n";
  emit_text(table.str(), o.out_path, out);
  return all_pass ? 0 : 1;
}

} // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threaded (1+1+3) analysis of 5D metrics"};
  app.require_subcommand(1);

  SubOpts kin_o, conn_o, integ_o, cls_o, crit_o, val_o;

  CLI::App* kin = app.add_subcommand("kinematics",
                                     "Kinematic quantities at a point");
  add_config_flag(kin, kin_o);
  add_point_flag(kin, kin_o);
  add_out_flag(kin, kin_o);

  CLI::App* conn = app.add_subcommand("connection",
                                      "Connection coefficients at a point");
  add_config_flag(conn, conn_o);
  add_point_flag(conn, conn_o);
  add_out_flag(conn, conn_o);

  CLI::App* integ = app.add_subcommand("integrate",
                                       "Integrate the equations of motion");
  add_config_flag(integ, integ_o);
  add_integration_flags(integ, integ_o);
  add_out_flag(integ, integ_o);

  CLI::App* cls = app.add_subcommand("classify",
                                     "Classify a trajectory against the special curve classes");
  add_config_flag(cls, cls_o);
  cls->add_option("--trajectory", cls_o.trajectory,
                  "Trajectory CSV to classify (default: integrate the scenario)");
  add_integration_flags(cls, cls_o);
  add_out_flag(cls, cls_o);

  CLI::App* crit = app.add_subcommand("critical-points",
                                      "Critical points of the warping function");
  add_config_flag(crit, crit_o);
  crit_o.o_tol = crit->add_option("--tol", crit_o.tol, "Gradient tolerance");
  add_out_flag(crit, crit_o);

  CLI::App* val = app.add_subcommand("validate",
                                     "Cross-check battery for the scenario's metric");
  add_config_flag(val, val_o);
  add_integration_flags(val, val_o);
  add_out_flag(val, val_o);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (kin->parsed()) return run_kinematics(kin_o, out);
    if (conn->parsed()) return run_connection(conn_o, out);
    if (integ->parsed()) return run_integrate(integ_o, out);
    if (cls->parsed()) return run_classify(cls_o, out);
    if (crit->parsed()) return run_critical_points(crit_o, out);
    if (val->parsed()) return run_validate(val_o, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EvalDomainError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

} // namespace thread5d::cli
