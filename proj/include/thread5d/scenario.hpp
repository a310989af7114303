#pragma once

#include <optional>
#include <string>

#include "thread5d/classify.hpp"

namespace thread5d {

// Initial curve data. The five velocity entries are read in the declared
// frame: adapted (u0, u1, u2, u3, u4) or natural (dx^a/dt).
struct InitialState {
  Point5 point{};
  std::array<double, 5> velocity{};
  bool adapted_frame = true;
};

// One self-contained run description, as loaded from a scenario JSON file.
// Every block except the metric is optional; defaults match the integrator
// and classification defaults.
struct Scenario {
  MetricSpec metric;
  std::optional<InitialState> initial;
  double t0 = 0.0;
  double t1 = 1.0;
  IntegratorOptions integrator;
  std::optional<Region5> region;
  std::optional<CriticalPointWindow> window;
  double tolerance = 1e-8;
};

// Parses and validates scenario JSON against the schema shipped in-repo
// (embedded at build time). `origin` names the source in error messages.
// Throws ConfigError on malformed JSON, schema violations (message carries
// the JSON path), or inconsistent values (t1 <= t0, bad step).
Scenario parse_scenario(const std::string& json_text, const std::string& origin);
Scenario load_scenario(const std::string& path);

// Resolves the scenario's initial block into a geodesic state, applying the
// frame conversion at the initial point. Throws ConfigError when the
// scenario has no initial block.
GeodesicState initial_state(const ThreadedMetric& m, const Scenario& sc);

} // namespace thread5d
