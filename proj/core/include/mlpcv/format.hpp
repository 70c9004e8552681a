#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace mlpcv {

// Shortest round-trip decimal representation. Used for every number that
// lands in a CSV/SVG/JSON artifact so reruns are byte-identical.
inline void append_double(std::string& out, double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

inline std::string format_double(double value) {
  std::string s;
  append_double(s, value);
  return s;
}

}  // namespace mlpcv
