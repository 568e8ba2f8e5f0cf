#include "fpv/float_bits.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fpv {

std::int64_t ordinal_of(double x) {
    if (std::isnan(x)) throw std::domain_error("ordinal_of: NaN");
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    const std::uint64_t mag = bits & 0x7FFFFFFFFFFFFFFFull;
    return (bits >> 63) ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
}

double double_of_ordinal(std::int64_t ord) {
    std::uint64_t bits;
    if (ord < 0)
        bits = 0x8000000000000000ull | static_cast<std::uint64_t>(-ord);
    else
        bits = static_cast<std::uint64_t>(ord);
    return std::bit_cast<double>(bits);
}

std::uint64_t ulps_between(double a, double b) {
    const std::int64_t oa = ordinal_of(a), ob = ordinal_of(b);
    return oa >= ob ? static_cast<std::uint64_t>(oa) - static_cast<std::uint64_t>(ob)
                    : static_cast<std::uint64_t>(ob) - static_cast<std::uint64_t>(oa);
}

double next_up(double x) { return std::nextafter(x, HUGE_VAL); }
double next_down(double x) { return std::nextafter(x, -HUGE_VAL); }

double bits_of_error(double actual, double ideal) {
    const std::uint64_t u = ulps_between(actual, ideal);
    return std::log2(1.0 + static_cast<double>(u));
}

}  // namespace fpv
