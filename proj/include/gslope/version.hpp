#pragma once

#include <string>

namespace gslope {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr int kFormatsVersion = 1;  // CSV/JSON schemas emitted by the CLI

inline std::string version_string() {
  return std::string("gslope ") + kLibraryVersion + " (formats v" +
         std::to_string(kFormatsVersion) + ")";
}

}  // namespace gslope
