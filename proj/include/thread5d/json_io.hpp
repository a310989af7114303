#pragma once

#include <cstdio>
#include <string>

#include <json.hpp>

#include "thread5d/linalg.hpp"

namespace thread5d {

// 17 significant digits: enough to round-trip any double exactly. Negative
// zero is folded into plain zero so reports stay tidy.
inline std::string fmt17(double x) {
  if (x == 0.0) x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Pretty serializer that prints every floating-point number with 17
// significant digits; nlohmann's own dump would shorten them. Key order is
// the document's insertion order, so output bytes are reproducible.
inline void dump17_into(const nlohmann::ordered_json& j, std::string& out,
                        int depth) {
  using value_t = nlohmann::ordered_json::value_t;
  const std::string pad(2 * static_cast<std::size_t>(depth), ' ');
  const std::string pad_in(2 * static_cast<std::size_t>(depth + 1), ' ');
  switch (j.type()) {
    case value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad_in + nlohmann::ordered_json(key).dump() + ": ";
        dump17_into(val, out, depth + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Scalar-only arrays stay on one line; nested ones get one row each.
      bool nested = false;
      for (const auto& el : j) nested = nested || el.is_structured();
      out += nested ? "[\n" : "[";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += nested ? ",\n" : ", ";
        first = false;
        if (nested) out += pad_in;
        dump17_into(el, out, depth + 1);
      }
      out += nested ? "\n" + pad + "]" : "]";
      return;
    }
    case value_t::number_float:
      out += fmt17(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

inline std::string dump17(const nlohmann::ordered_json& j) {
  std::string out;
  dump17_into(j, out, 0);
  out += "\n";
  return out;
}

inline nlohmann::ordered_json json_vec3(const Vec3& v) {
  return nlohmann::ordered_json{v[0], v[1], v[2]};
}

inline nlohmann::ordered_json json_mat3(const Mat3& m) {
  return nlohmann::ordered_json{json_vec3(m[0]), json_vec3(m[1]), json_vec3(m[2])};
}

inline nlohmann::ordered_json json_point(const std::array<double, 5>& p) {
  return nlohmann::ordered_json{p[0], p[1], p[2], p[3], p[4]};
}

} // namespace thread5d
