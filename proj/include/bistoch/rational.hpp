#ifndef BISTOCH_RATIONAL_HPP
#define BISTOCH_RATIONAL_HPP

#include <gmpxx.h>

#include <string>

namespace bistoch {

// Exact rational scalar. GMP keeps compositions and long pairing sweeps
// overflow-free; everything in exact mode reduces through this type.
using Rat = mpq_class;

// Parses "2/5", "-3/7", "4", "0.25", ".5", "-1.75". Decimal strings become
// exact fractions over a power of ten (never routed through double).
Rat parse_rational(const std::string& text);

// "n/d" with d > 0, or plain "n" when the denominator is 1.
std::string rational_to_string(const Rat& q);

inline double rational_to_double(const Rat& q) { return q.get_d(); }

}  // namespace bistoch

#endif  // BISTOCH_RATIONAL_HPP
