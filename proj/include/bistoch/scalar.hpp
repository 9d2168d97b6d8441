#ifndef BISTOCH_SCALAR_HPP
#define BISTOCH_SCALAR_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "bistoch/rational.hpp"

namespace bistoch {

// Every numeric routine is templated over the scalar; the two instantiations
// are Rat (exact mode, tolerance 0) and double (float mode, tolerance 1e-12).
template <typename S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rat> {
  static constexpr bool exact = true;
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static Rat tolerance() { return Rat(0); }
  static Rat fraction(long num, long den) {
    Rat q(num, den);
    q.canonicalize();  // mpq_class(n, d) does not reduce on its own
    return q;
  }
  static Rat abs(const Rat& x) { return x < 0 ? Rat(-x) : x; }
  static bool is_zero(const Rat& x) { return x == 0; }
  static double to_double(const Rat& x) { return x.get_d(); }
  static Rat parse(const std::string& s) { return parse_rational(s); }
  static std::string format(const Rat& x) { return rational_to_string(x); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double tolerance() { return 1e-12; }
  static double fraction(long num, long den) {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  static double abs(double x) { return std::fabs(x); }
  static bool is_zero(double x) { return std::fabs(x) <= tolerance(); }
  static double to_double(double x) { return x; }
  static double parse(const std::string& s) { return parse_rational(s).get_d(); }
  static std::string format(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  }
};

template <typename S>
bool approx_equal(const S& a, const S& b) {
  return ScalarTraits<S>::abs(a - b) <= ScalarTraits<S>::tolerance();
}

}  // namespace bistoch

#endif  // BISTOCH_SCALAR_HPP
