#include "thread5d/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "thread5d/scenario_schema.hpp"

namespace thread5d {

namespace {

using nlohmann::json;

// Minimal JSON-Schema checker covering the keyword subset the scenario
// schema uses: type, enum, required, properties, additionalProperties
// (boolean or schema), items, minItems, maxItems.
class SchemaChecker {
 public:
  explicit SchemaChecker(const std::string& origin) : origin_(origin) {}

  void check(const json& schema, const json& value, const std::string& path) {
    if (auto it = schema.find("type"); it != schema.end())
      check_type(it->get<std::string>(), value, path);
    if (auto it = schema.find("enum"); it != schema.end()) {
      bool hit = false;
      for (const auto& cand : *it) hit = hit || cand == value;
      if (!hit) {
        std::string opts;
        for (const auto& cand : *it) {
          if (!opts.empty()) opts += ", ";
          opts += cand.dump();
        }
        fail(path, "must be one of " + opts);
      }
    }
    if (value.is_object()) check_object(schema, value, path);
    if (value.is_array()) check_array(schema, value, path);
  }

 private:
  void check_type(const std::string& type, const json& value,
                  const std::string& path) {
    bool ok = false;
    if (type == "object") ok = value.is_object();
    else if (type == "array") ok = value.is_array();
    else if (type == "string") ok = value.is_string();
    else if (type == "boolean") ok = value.is_boolean();
    else if (type == "number") ok = value.is_number();
    else if (type == "integer")
      ok = value.is_number_integer() || value.is_number_unsigned();
    if (!ok) fail(path, "must have type " + type);
  }

  void check_object(const json& schema, const json& value,
                    const std::string& path) {
    if (auto it = schema.find("required"); it != schema.end())
      for (const auto& name : *it)
        if (!value.contains(name.get<std::string>()))
          fail(path, "is missing required key \"" + name.get<std::string>() + "\"");

    const json* props = nullptr;
    if (auto it = schema.find("properties"); it != schema.end()) props = &*it;

    for (const auto& [key, sub] : value.items()) {
      const std::string sub_path = path + "/" + key;
      if (props && props->contains(key)) {
        check(props->at(key), sub, sub_path);
        continue;
      }
      auto ap = schema.find("additionalProperties");
      if (ap == schema.end()) continue;
      if (ap->is_boolean()) {
        if (!ap->get<bool>()) fail(sub_path, "is not an allowed key");
      } else {
        check(*ap, sub, sub_path);
      }
    }
  }

  void check_array(const json& schema, const json& value,
                   const std::string& path) {
    if (auto it = schema.find("minItems");
        it != schema.end() && value.size() < it->get<std::size_t>())
      fail(path, "must have at least " + it->dump() + " items");
    if (auto it = schema.find("maxItems");
        it != schema.end() && value.size() > it->get<std::size_t>())
      fail(path, "must have at most " + it->dump() + " items");
    if (auto it = schema.find("items"); it != schema.end())
      for (std::size_t i = 0; i < value.size(); ++i)
        check(*it, value[i], path + "/" + std::to_string(i));
  }

  [[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(origin_ + ": " + (path.empty() ? "/" : path) + " " + msg);
  }

  std::string origin_;
};

const json& scenario_schema() {
  static const json schema = json::parse(detail::kScenarioSchemaJson);
  return schema;
}

template <std::size_t N>
std::array<double, N> to_doubles(const json& arr) {
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = arr[i].get<double>();
  return out;
}

} // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  SchemaChecker(origin).check(scenario_schema(), doc, "");

  Scenario sc;
  const json& metric = doc.at("metric");
  sc.metric.family = family_from_name(metric.at("family").get<std::string>());
  if (metric.contains("fields"))
    for (const auto& [key, val] : metric.at("fields").items())
      sc.metric.fields[key] = val.get<std::string>();

  if (doc.contains("initial")) {
    InitialState init;
    init.point = to_doubles<5>(doc["initial"]["point"]);
    init.velocity = to_doubles<5>(doc["initial"]["velocity"]);
    if (doc["initial"].contains("frame"))
      init.adapted_frame = doc["initial"]["frame"].get<std::string>() == "adapted";
    sc.initial = init;
  }

  if (doc.contains("time")) {
    if (doc["time"].contains("t0")) sc.t0 = doc["time"]["t0"].get<double>();
    if (doc["time"].contains("t1")) sc.t1 = doc["time"]["t1"].get<double>();
  }
  if (!(sc.t1 > sc.t0))
    throw ConfigError(origin + ": /time must have t1 > t0");

  if (doc.contains("integrator")) {
    const json& integ = doc["integrator"];
    if (integ.contains("name"))
      sc.integrator.kind = integ["name"].get<std::string>() == "rk4"
                               ? IntegratorOptions::Kind::Rk4
                               : IntegratorOptions::Kind::Rkf45;
    if (integ.contains("step")) sc.integrator.step = integ["step"].get<double>();
    if (integ.contains("abs_tol"))
      sc.integrator.abs_tol = integ["abs_tol"].get<double>();
    if (integ.contains("rel_tol"))
      sc.integrator.rel_tol = integ["rel_tol"].get<double>();
    if (integ.contains("variant"))
      sc.integrator.variant = variant_from_name(integ["variant"].get<std::string>());
  }
  if (!(sc.integrator.step > 0.0))
    throw ConfigError(origin + ": /integrator/step must be positive");
  if (!(sc.integrator.abs_tol > 0.0) || !(sc.integrator.rel_tol > 0.0))
    throw ConfigError(origin + ": /integrator tolerances must be positive");

  if (doc.contains("region")) {
    Region5 region;
    region.min = to_doubles<5>(doc["region"]["min"]);
    region.max = to_doubles<5>(doc["region"]["max"]);
    if (doc["region"].contains("grid"))
      for (int i = 0; i < 5; ++i)
        region.grid[i] = doc["region"]["grid"][i].get<int>();
    for (int i = 0; i < 5; ++i) {
      if (region.grid[i] < 1)
        throw ConfigError(origin + ": /region/grid counts must be positive");
      if (region.max[i] < region.min[i])
        throw ConfigError(origin + ": /region must have max >= min per axis");
    }
    sc.region = region;
  }

  if (doc.contains("critical_points")) {
    CriticalPointWindow w;
    w.min = to_doubles<2>(doc["critical_points"]["min"]);
    w.max = to_doubles<2>(doc["critical_points"]["max"]);
    if (doc["critical_points"].contains("grid"))
      for (int i = 0; i < 2; ++i)
        w.grid[i] = doc["critical_points"]["grid"][i].get<int>();
    if (doc["critical_points"].contains("tol"))
      w.tol = doc["critical_points"]["tol"].get<double>();
    for (int i = 0; i < 2; ++i) {
      if (w.grid[i] < 1)
        throw ConfigError(origin + ": /critical_points/grid counts must be positive");
      if (w.max[i] < w.min[i])
        throw ConfigError(origin + ": /critical_points must have max >= min");
    }
    if (!(w.tol > 0.0))
      throw ConfigError(origin + ": /critical_points/tol must be positive");
    sc.window = w;
  }

  if (doc.contains("tolerance")) sc.tolerance = doc["tolerance"].get<double>();
  if (!(sc.tolerance > 0.0))
    throw ConfigError(origin + ": /tolerance must be positive");

  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

GeodesicState initial_state(const ThreadedMetric& m, const Scenario& sc) {
  if (!sc.initial)
    throw ConfigError("scenario has no initial state");
  const InitialState& init = *sc.initial;
  GeodesicState s;
  s.point = init.point;
  if (init.adapted_frame) {
    s.vel.u0 = init.velocity[0];
    s.vel.spatial = {init.velocity[1], init.velocity[2], init.velocity[3]};
    s.vel.u4 = init.velocity[4];
  } else {
    const MetricSample sample = sample_fields(m, init.point);
    s.vel = to_adapted(sample, NaturalVelocity{init.velocity[0], init.velocity[1],
                                               init.velocity[2], init.velocity[3],
                                               init.velocity[4]});
  }
  return s;
}

} // namespace thread5d
