#include "mononet/scalar.hpp"

#include <cmath>

namespace mononet {

namespace {
unsigned g_bits = 256;

unsigned bits_to_digits10(unsigned bits) {
  // ceil(bits * log10(2)) plus a guard digit so parsing recovers every bit.
  return static_cast<unsigned>(std::ceil(bits * 0.3010299956639812)) + 1;
}

const bool g_default_set = [] {
  Real::default_precision(bits_to_digits10(256));
  return true;
}();
}  // namespace

void set_precision_bits(unsigned bits) {
  if (bits < 53) throw input_error("mantissa bits must be >= 53");
  g_bits = bits;
  Real::default_precision(bits_to_digits10(bits));
}

unsigned precision_bits() { return g_bits; }

std::string to_decimal_string(const Real& x) {
  return x.str(0, std::ios_base::scientific);
}

Real from_decimal_string(const std::string& s) {
  try {
    return Real(s);
  } catch (const std::exception&) {
    throw parse_error("not a decimal number: '" + s + "'");
  }
}

double compensated_sum(const std::vector<double>& terms) {
  double sum = 0.0, c = 0.0;
  for (double t : terms) {
    double y = t - c;
    double v = sum + y;
    c = (v - sum) - y;
    sum = v;
  }
  return sum;
}

Real binomial_real(unsigned n, unsigned k) {
  if (k > n) return Real(0);
  Real r(1);
  for (unsigned i = 0; i < k; ++i) {
    r *= Real(n - i);
    r /= Real(i + 1);
  }
  return r;
}

Real factorial_real(unsigned n) {
  Real r(1);
  for (unsigned i = 2; i <= n; ++i) r *= Real(i);
  return r;
}

}  // namespace mononet
