#pragma once

#include <cstdio>
#include <string>

namespace spectral_decay {

/// Fixed 17-significant-digit rendering; identical doubles always print identically.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace spectral_decay
