#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bcp/errors.hpp"

namespace bcp {

using json = nlohmann::json;

// 17 significant digits: every double survives a text round trip.
inline std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

inline std::string format_shortest(double value) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

namespace detail {

inline void dump_into(const json& j, std::string& out) {
  switch (j.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_into(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        dump_into(v, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
      } else {
        out += format_g17(v);
      }
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

// Compact JSON with every real written as %.17g; non-finite reals become strings.
inline std::string dump_json(const json& j) {
  std::string out;
  detail::dump_into(j, out);
  return out;
}

// Reads a real that may have been encoded as "inf"/"-inf"/"nan".
inline double real_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    throw ParseError("expected a number, got string '" + s + "'", 0);
  }
  return j.get<double>();
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void require_version(const json& doc, const std::string& expected) {
  if (!doc.is_object() || !doc.contains("version"))
    throw ParseError("missing version tag (expected '" + expected + "')", 0);
  const auto got = doc.at("version").get<std::string>();
  if (got != expected)
    throw ParseError("version mismatch: expected '" + expected + "', got '" + got + "'", 0);
}

}  // namespace bcp
