#pragma once

#include <cstdint>

#include "fpv/rational.hpp"

namespace fpv {

// Monotone ordinal encoding of binary64. -0 and +0 share ordinal 0; +/-inf map
// to the extreme finite ordinals +/-0x7FF0000000000000. NaN is rejected.
std::int64_t ordinal_of(double x);
double double_of_ordinal(std::int64_t ord);

// |ordinal(a) - ordinal(b)|. Inputs must not be NaN.
std::uint64_t ulps_between(double a, double b);

double next_up(double x);
double next_down(double x);

// log2(1 + ulps); in [0, ~64].
double bits_of_error(double actual, double ideal);

}  // namespace fpv
