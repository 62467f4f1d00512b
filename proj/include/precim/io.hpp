#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "precim/errors.hpp"

namespace precim {

/// Shortest round-trippable decimal with the given significant digits.
inline std::string fmt_g(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    return out;
}

}  // namespace precim
