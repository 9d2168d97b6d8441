#include "bistoch/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace bistoch {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rat parse_rational(const std::string& text) {
  std::string s = text;
  // strip surrounding whitespace
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  if (s.empty()) throw std::invalid_argument("empty rational literal");

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = (s.front() == '-');
    s.erase(s.begin());
  }
  if (s.empty()) throw std::invalid_argument("bad rational literal: " + text);

  Rat value;
  if (auto slash = s.find('/'); slash != std::string::npos) {
    const std::string num = s.substr(0, slash);
    const std::string den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw std::invalid_argument("bad rational literal: " + text);
    mpz_class n(num), d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + text);
    value = Rat(n, d);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    const std::string ipart = s.substr(0, dot);
    const std::string fpart = s.substr(dot + 1);
    if ((!ipart.empty() && !all_digits(ipart)) || (fpart.empty() && ipart.empty()) ||
        (!fpart.empty() && !all_digits(fpart)))
      throw std::invalid_argument("bad rational literal: " + text);
    mpz_class n(ipart.empty() ? std::string("0") : ipart);
    mpz_class scale = 1;
    for (char c : fpart) {
      n = n * 10 + (c - '0');
      scale *= 10;
    }
    value = Rat(n, scale);
  } else {
    if (!all_digits(s)) throw std::invalid_argument("bad rational literal: " + text);
    value = Rat(mpz_class(s));
  }
  value.canonicalize();
  return negative ? Rat(-value) : value;
}

std::string rational_to_string(const Rat& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

}  // namespace bistoch
