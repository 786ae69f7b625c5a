#pragma once

#include <string>

namespace dztp {

/// printf "%.15g"; the rendering used for every number the tools emit.
std::string format_number(double v);

/// v rounded to 15 significant digits (so shortest round-trip printing
/// reproduces format_number).
double round_significant(double v);

}  // namespace dztp
