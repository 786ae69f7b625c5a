#include "dztp/format.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace dztp {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

double round_significant(double v) {
    if (!std::isfinite(v)) {
        return v;
    }
    return std::strtod(format_number(v).c_str(), nullptr);
}

}  // namespace dztp
