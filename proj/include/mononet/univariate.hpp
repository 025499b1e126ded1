#pragma once

#include "mononet/network.hpp"

#include <memory>
#include <vector>

namespace mononet {

// Taylor enclosure around a cell center c with radius rho:
//   f(c+u) ∈ sum_k coef[k] u^k  ±  remainder   for |u| <= rho.
struct TaylorModel {
  std::vector<Real> coef;
  Real remainder{0};
};

// A univariate function that can produce rigorous Taylor enclosures. This is
// how sup-norm errors get certified without the wildly loose sum-of-|nu|
// Lipschitz constants: the enclosure of f - g keeps the cancellation between
// a synthesized network and its target.
class UnivariateFn {
 public:
  virtual ~UnivariateFn() = default;
  virtual TaylorModel taylor(const Real& c, const Real& rho, int order) const = 0;
  virtual Real eval(const Real& t) const = 0;
};

// f(t) = sum nu_i exp(w_i t), with scalar weights.
class ExpSumFn : public UnivariateFn {
 public:
  explicit ExpSumFn(const ShallowExpSum& net);
  ExpSumFn(std::vector<Real> nu, std::vector<Real> w);
  TaylorModel taylor(const Real& c, const Real& rho, int order) const override;
  Real eval(const Real& t) const override;
  Real max_abs_weight() const { return max_w_; }

 private:
  std::vector<Real> nu_, w_;
  Real max_w_{0};
};

// Polynomial in the monomial basis; Taylor shift is exact.
class PolyFn : public UnivariateFn {
 public:
  explicit PolyFn(std::vector<Real> coef);
  TaylorModel taylor(const Real& c, const Real& rho, int order) const override;
  Real eval(const Real& t) const override;
  const std::vector<Real>& coefficients() const { return coef_; }

 private:
  std::vector<Real> coef_;
};

// t^m as a target.
class MonomialFn : public UnivariateFn {
 public:
  explicit MonomialFn(unsigned degree);
  TaylorModel taylor(const Real& c, const Real& rho, int order) const override;
  Real eval(const Real& t) const override;

 private:
  unsigned m_;
};

// ln t on (0, inf).
class LogFn : public UnivariateFn {
 public:
  TaylorModel taylor(const Real& c, const Real& rho, int order) const override;
  Real eval(const Real& t) const override;
};

// nu * e^t.
class ScaledExpFn : public UnivariateFn {
 public:
  explicit ScaledExpFn(Real nu) : nu_(std::move(nu)) {}
  TaylorModel taylor(const Real& c, const Real& rho, int order) const override;
  Real eval(const Real& t) const override;

 private:
  Real nu_;
};

class ZeroFn : public UnivariateFn {
 public:
  TaylorModel taylor(const Real&, const Real&, int) const override { return {}; }
  Real eval(const Real&) const override { return Real(0); }
};

struct SupBound {
  Real bound;         // rigorous upper bound on sup |F - G|
  Real measured;      // largest sampled |F - G| (cell centers)
  std::size_t cells;  // cells in the final subdivision
  Real min_cell_width;
};

// Certified sup_{[a,b]} |F - G| via branch-and-bound on Taylor enclosures.
// Stops once the enclosure gap is below gap_tol (absolute).
SupBound certified_sup_diff(const UnivariateFn& F, const UnivariateFn& G, const Real& a,
                            const Real& b, const Real& gap_tol, int order = 16,
                            std::size_t max_cells = 400000);

// Polynomial helpers shared by synthesis and flattening.
std::vector<Real> poly_derivative(const std::vector<Real>& coef);
Real poly_eval(const std::vector<Real>& coef, const Real& x);
// Coefficients of p(x+shift) in powers of x (exact Horner shift).
std::vector<Real> poly_shift(const std::vector<Real>& coef, const Real& shift);

}  // namespace mononet
