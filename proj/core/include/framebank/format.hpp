// Copyright (C) 2026 the framebank authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdio>
#include <string>

namespace framebank {

// Shortest-ish deterministic decimal rendering used by every CSV/JSON writer.
// Same double in, same bytes out.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string format_float(float v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.7g", static_cast<double>(v));
  return buf;
}

}  // namespace framebank
