#pragma once

#include <cstdio>
#include <string>

namespace dbarw {

/// All emitted floats go through here: 17 significant digits, so values
/// round-trip exactly and output is byte-stable.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace dbarw
