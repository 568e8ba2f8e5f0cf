#pragma once

#include "fpv/interval.hpp"

namespace fpv {

enum class TranscOp { Sqrt, Cbrt, Exp, Log, Sin, Cos };

const char* transc_name(TranscOp op);

// Enclosure of the exact image of `a` under `op`, computed at >= precision_bits
// working precision with outward rounding. Domain faults (sqrt of a range with
// lo < 0, log with lo <= 0) raise ContainmentFault.
Interval iv_transcendental(TranscOp op, const Interval& a, long precision_bits);

Interval iv_sqrt(const Interval& a, long precision_bits);
Interval iv_cbrt(const Interval& a, long precision_bits);
Interval iv_exp(const Interval& a, long precision_bits);
Interval iv_log(const Interval& a, long precision_bits);
Interval iv_sin(const Interval& a, long precision_bits);
Interval iv_cos(const Interval& a, long precision_bits);

}  // namespace fpv
