#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace mononet {

// Extended-precision scalar. Variable mantissa, default 256 bits; synthesis
// coefficients reach magnitudes like h^{-n} binom(n,i) with near-total
// cancellation, so double precision is not an option for certification.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

using VectorR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using MatrixR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using VectorD = Eigen::VectorXd;
using MatrixD = Eigen::MatrixXd;

enum class SummationMode { Compensated, Extended };

struct NumericPrecision {
  unsigned mantissa_bits = 256;  // >= 53
  SummationMode summation = SummationMode::Extended;
};

// Sets the default mantissa for all subsequently constructed Reals.
void set_precision_bits(unsigned bits);
unsigned precision_bits();

// Decimal string with enough digits to round-trip at the current precision.
std::string to_decimal_string(const Real& x);
Real from_decimal_string(const std::string& s);

// Kahan summation for the double-precision evaluation path.
double compensated_sum(const std::vector<double>& terms);

Real binomial_real(unsigned n, unsigned k);
Real factorial_real(unsigned n);

// Error taxonomy. Everything user-facing derives from error so the CLI can
// map failures to structured records.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct input_error : error {
  using error::error;
};
struct range_error : error {
  using error::error;
};
struct parse_error : error {
  using error::error;
};
struct precision_error : error {
  using error::error;
};
struct synthesis_error : error {
  using error::error;
};
struct resource_error : error {
  using error::error;
};

}  // namespace mononet
