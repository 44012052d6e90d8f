#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qmeixner/simulate.hpp"
#include "qmeixner/spectra.hpp"

namespace qmeixner {

/// Decimal rendering with 17 significant digits: enough to round-trip any
/// double exactly, and stable across platforms (unlike shortest-form output).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// fmt17 wrapped for JSON, where non-finite numbers have no literal: they
/// become null.
inline std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt17(v);
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

inline std::string json_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += json_number(v[i]);
  }
  out += "]";
  return out;
}

inline std::string measure_to_csv(const DiscreteMeasure& m) {
  std::string out = "node,weight\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    out += fmt17(m.nodes[i]);
    out += ",";
    out += fmt17(m.weights[i]);
    out += "\n";
  }
  return out;
}

inline std::string measure_to_json(const DiscreteMeasure& m) {
  return "{\"nodes\":" + json_array(m.nodes) + ",\"weights\":" + json_array(m.weights) + "}\n";
}

inline std::string paths_to_csv(const PathSample& ps) {
  std::string out = "path_id,time,value\n";
  for (std::size_t p = 0; p < ps.values.size(); ++p) {
    for (std::size_t i = 0; i < ps.times.size(); ++i) {
      out += std::to_string(p);
      out += ",";
      out += fmt17(ps.times[i]);
      out += ",";
      out += fmt17(ps.values[p][i]);
      out += "\n";
    }
  }
  return out;
}

inline std::string paths_to_json(const PathSample& ps) {
  std::string out = "{\"times\":" + json_array(ps.times) + ",\"paths\":[";
  for (std::size_t p = 0; p < ps.values.size(); ++p) {
    if (p) out += ",";
    out += json_array(ps.values[p]);
  }
  out += "]}\n";
  return out;
}

inline std::string moments_to_csv(const std::vector<double>& mom) {
  std::string out = "order,value\n";
  for (std::size_t k = 0; k < mom.size(); ++k) {
    out += std::to_string(k);
    out += ",";
    out += fmt17(mom[k]);
    out += "\n";
  }
  return out;
}

inline std::string moments_to_json(const std::vector<double>& mom) {
  return "{\"moments\":" + json_array(mom) + "}\n";
}

}  // namespace qmeixner
