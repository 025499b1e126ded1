#pragma once

#include "mononet/certify.hpp"
#include "mononet/network.hpp"

namespace mononet {

// Symmetric Riemann-derivative stencil parameters.
struct StencilParams {
  unsigned degree = 0;
  Real step{1};
  Real center{0};
};

struct PolynomialCoeffs {
  std::vector<Real> a;  // a[0] + a[1] x + ...
  Real xi{0};           // max |a_i|

  static PolynomialCoeffs from(std::vector<Real> coef);
  unsigned degree() const;  // index of trailing non-zero coefficient
  bool is_zero() const;
};

struct MonomialSynthesis {
  ShallowExpSum net;
  StencilParams stencil;
  CertifiedErrorReport report;
};

// x^n on [0,1] as an (n+1)-term exp stencil: the limit representation of the
// n-th derivative of w -> exp(w x) at w = 0, with h halved until the
// certified error clears eps with a 10% margin.
MonomialSynthesis synth_monomial_exp(unsigned n, const Real& eps);

struct PolynomialSynthesis {
  ShallowExpSum net;
  CertifiedErrorReport report;
  std::size_t term_cap;  // (r+1)^2
};

PolynomialSynthesis synth_polynomial_exp(const PolynomialCoeffs& p, const Real& eps);

struct LogSynthesis {
  ShallowExpSum net;
  unsigned degree;      // adaptive Taylor degree actually used
  unsigned degree_cap;  // ceil(2/(eps*delta) - 1)
  PolynomialCoeffs taylor;
  Real taylor_error;  // certified sup |g_r - ln| on [delta, 1]
  CertifiedErrorReport report;
};

// ln x on (delta, 1] via the Taylor series at 1 fed through
// synth_polynomial_exp. The closed-form degree formula is treated as a cap; the
// lowest certifying degree wins.
LogSynthesis synth_log_exp(const Real& delta, const Real& eps);

struct ProductTwoLayerSynthesis {
  LayeredNetwork net;
  ShallowExpSum log_unit;  // the per-coordinate ln approximation
  Real log_error;          // its certified univariate error
  Real delta;
  Real inner_lo, inner_hi;            // proven range of the output neuron's pre-activation
  Real inner_seen_lo, inner_seen_hi;  // range observed on the report lattice
  CertifiedErrorReport report;
};

// prod x_i on (delta,1]^d, delta = exp(-C/d), as exp(sum_i h_hat(x_i)).
ProductTwoLayerSynthesis synth_product_two_layer(unsigned d, const Real& C, const Real& eps);

struct ExactSmoothSynthesis {
  ShallowExpSum net;
  StencilParams stencil;
  CertifiedErrorReport report;
};

// prod x_i on [-k,k]^d with exactly 2^d exp neurons (cross-derivative
// stencil); the count never depends on k or eps.
ExactSmoothSynthesis synth_exact_smooth(unsigned d, const Real& eps, const Real& k);

// Raw stencil builders (h fixed), used by the convergence-order checks.
ShallowExpSum monomial_stencil(unsigned n, const Real& h);
ShallowExpSum exact_smooth_stencil(unsigned d, const Real& h);

}  // namespace mononet
