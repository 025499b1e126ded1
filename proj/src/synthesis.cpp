#include "mononet/synthesis.hpp"

#include "mononet/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mononet {

namespace {

Real real_exp(const Real& x) { return exp(x); }

// Bits of cancellation headroom we insist on beyond the estimated loss.
constexpr unsigned kGuardBits = 64;

Real log2_real(const Real& x) { return log(x) / log(Real(2)); }

void require_precision(const Real& cancellation_bits, const char* where) {
  if (cancellation_bits + kGuardBits > Real(precision_bits())) {
    std::ostringstream os;
    os << where << ": needs about " << static_cast<long long>(cancellation_bits + kGuardBits)
       << " mantissa bits but only " << precision_bits()
       << " are configured; raise --precision-bits";
    throw precision_error(os.str());
  }
}

}  // namespace

PolynomialCoeffs PolynomialCoeffs::from(std::vector<Real> coef) {
  PolynomialCoeffs p;
  p.a = std::move(coef);
  for (const Real& c : p.a) p.xi = std::max(p.xi, abs(c));
  return p;
}

unsigned PolynomialCoeffs::degree() const {
  for (std::size_t i = a.size(); i > 0; --i)
    if (a[i - 1] != 0) return static_cast<unsigned>(i - 1);
  return 0;
}

bool PolynomialCoeffs::is_zero() const {
  for (const Real& c : a)
    if (c != 0) return false;
  return true;
}

ShallowExpSum monomial_stencil(unsigned n, const Real& h) {
  if (h <= 0) throw input_error("monomial_stencil: step must be positive");
  ShallowExpSum net = ShallowExpSum::zero(1);
  if (n == 0) {
    VectorR w(1);
    w(0) = 0;
    net.add_term(Real(1), w);
    return net;
  }
  // Central finite difference of w -> exp(w x) at w = 0:
  //   h^{-n} sum_i binom(n,i) (-1)^{n-i} exp((i - n/2) h x) = (2 sinh(hx/2)/h)^n.
  const Real hn = pow(h, static_cast<int>(n));
  for (unsigned i = 0; i <= n; ++i) {
    Real nu = binomial_real(n, i) / hn;
    if ((n - i) % 2 == 1) nu = -nu;
    VectorR w(1);
    w(0) = (Real(i) - Real(n) / 2) * h;
    net.add_term(std::move(nu), std::move(w));
  }
  return net;
}

MonomialSynthesis synth_monomial_exp(unsigned n, const Real& eps) {
  if (eps <= 0) throw input_error("synth_monomial_exp: eps must be positive");
  MonomialSynthesis out;
  out.stencil.degree = n;
  if (n == 0) {
    out.net = monomial_stencil(0, Real(1));
    out.stencil.step = 0;
    out.report.box = Box::cube(1, Real(0), Real(1));
    out.report.bound = 0;
    out.report.method = "taylor_cells";
    out.report.stage = "monomial";
    out.report.notes = "constant term, representation is exact";
    return out;
  }

  MonomialFn target(n);
  Real h = Real(1) / Real(n);
  const Real gap = eps / 20;
  for (;;) {
    // Coefficients are ~ binom(n, n/2) h^{-n}; the stencil cancels down to
    // O(1) values on [0,1], so that entire magnitude is lost to cancellation.
    require_precision(Real(n) * log2_real(1 / h) + log2_real(binomial_real(n, n / 2)),
                      "synth_monomial_exp");
    ShallowExpSum net = monomial_stencil(n, h);
    ExpSumFn f(net);
    SupBound sb = certified_sup_diff(f, target, Real(0), Real(1), gap);
    if (sb.bound < eps * Real(9) / 10) {
      out.net = std::move(net);
      out.stencil.step = h;
      out.report.box = Box::cube(1, Real(0), Real(1));
      out.report.grid_spacing = sb.min_cell_width;
      out.report.grid_sup = sb.measured;
      out.report.bound = sb.bound;
      out.report.slack = sb.bound - sb.measured;
      out.report.method = "taylor_cells";
      out.report.stage = "monomial";
      return out;
    }
    h /= 2;
  }
}

PolynomialSynthesis synth_polynomial_exp(const PolynomialCoeffs& p, const Real& eps) {
  if (eps <= 0) throw input_error("synth_polynomial_exp: eps must be positive");
  if (p.a.empty()) throw input_error("synth_polynomial_exp: empty coefficient vector");

  PolynomialSynthesis out;
  const unsigned r = p.degree();
  out.term_cap = static_cast<std::size_t>(r + 1) * static_cast<std::size_t>(r + 1);
  out.net = ShallowExpSum::zero(1);

  std::size_t nnz = 0;
  for (unsigned i = 1; i < p.a.size(); ++i)
    if (p.a[i] != 0) ++nnz;

  // Constant term is an exact single exp neuron at w = 0.
  if (p.a[0] != 0) {
    VectorR w(1);
    w(0) = 0;
    out.net.add_term(p.a[0], w);
  }

  for (unsigned i = 1; i < p.a.size(); ++i) {
    if (p.a[i] == 0) continue;
    const Real scale = std::max(Real(1), abs(p.a[i]));
    MonomialSynthesis ms = synth_monomial_exp(i, eps / (Real(nnz) * scale));
    for (const auto& term : ms.net.terms) out.net.add_term(p.a[i] * term.nu, term.w);
  }
  out.net.merge_terms();
  if (static_cast<std::size_t>(out.net.terms.size()) > out.term_cap)
    throw synthesis_error("synth_polynomial_exp: term count exceeded (r+1)^2 cap");

  ExpSumFn f(out.net);
  PolyFn g(p.a);
  SupBound sb = certified_sup_diff(f, g, Real(0), Real(1), eps / 20);
  out.report.box = Box::cube(1, Real(0), Real(1));
  out.report.grid_spacing = sb.min_cell_width;
  out.report.grid_sup = sb.measured;
  out.report.bound = sb.bound;
  out.report.slack = sb.bound - sb.measured;
  out.report.certified = sb.bound <= eps;
  out.report.method = "taylor_cells";
  out.report.stage = "polynomial";
  return out;
}

namespace {

// Taylor polynomial of ln at 1, degree r, in the monomial basis:
// g_r(x) = sum_{i=1..r} (-1)^{i+1} (x-1)^i / i.
std::vector<Real> log_taylor_monomial(unsigned r) {
  std::vector<Real> q(r + 1, Real(0));
  for (unsigned i = 1; i <= r; ++i) {
    q[i] = Real(1) / Real(i);
    if (i % 2 == 0) q[i] = -q[i];
  }
  return poly_shift(q, Real(-1));
}

Real log_taylor_certified_error(unsigned r, const Real& delta, const Real& gap) {
  PolyFn g(log_taylor_monomial(r));
  LogFn target;
  return certified_sup_diff(g, target, delta, Real(1), gap).bound;
}

}  // namespace

LogSynthesis synth_log_exp(const Real& delta, const Real& eps) {
  if (!(delta > 0 && delta < 1)) throw input_error("synth_log_exp: delta must lie in (0,1)");
  if (eps <= 0) throw input_error("synth_log_exp: eps must be positive");

  LogSynthesis out;
  {
    const Real cap_real = ceil(2 / (eps * delta) - 1);
    if (cap_real > Real(1u << 20))
      throw resource_error("synth_log_exp: degree cap exceeds 2^20, eps*delta too small");
    out.degree_cap = static_cast<unsigned>(cap_real.convert_to<long long>());
  }
  if (out.degree_cap == 0) out.degree_cap = 1;

  // Budget split: half for the Taylor truncation, the rest for the exp
  // realization of the polynomial. The degree is the smallest one that
  // certifies, found by doubling then bisection; the cap only acts as a
  // hard ceiling.
  const Real taylor_budget = eps / 2;
  const Real gap = eps / 40;
  unsigned hi = 1;
  Real err_hi = log_taylor_certified_error(hi, delta, gap);
  while (err_hi >= taylor_budget) {
    if (hi >= out.degree_cap)
      throw synthesis_error("synth_log_exp: degree cap reached without certifying the Taylor tail");
    hi = std::min(out.degree_cap, hi * 2);
    err_hi = log_taylor_certified_error(hi, delta, gap);
  }
  unsigned lo = hi / 2;  // known to fail (or 0)
  while (hi - lo > 1) {
    const unsigned mid = lo + (hi - lo) / 2;
    if (mid == 0) break;
    Real err_mid = log_taylor_certified_error(mid, delta, gap);
    if (err_mid < taylor_budget) {
      hi = mid;
      err_hi = err_mid;
    } else {
      lo = mid;
    }
  }
  out.degree = hi;
  out.taylor_error = err_hi;
  out.taylor = PolynomialCoeffs::from(log_taylor_monomial(out.degree));

  PolynomialSynthesis ps = synth_polynomial_exp(out.taylor, eps - out.taylor_error);
  out.net = std::move(ps.net);

  ExpSumFn f(out.net);
  LogFn target;
  SupBound sb = certified_sup_diff(f, target, delta, Real(1), gap);
  out.report.box = Box::cube(1, delta, Real(1));
  out.report.grid_spacing = sb.min_cell_width;
  out.report.grid_sup = sb.measured;
  out.report.bound = sb.bound;
  out.report.slack = sb.bound - sb.measured;
  out.report.certified = sb.bound <= eps;
  out.report.method = "taylor_cells";
  out.report.stage = "log";
  return out;
}

ProductTwoLayerSynthesis synth_product_two_layer(unsigned d, const Real& C, const Real& eps) {
  if (d == 0) throw input_error("synth_product_two_layer: d must be positive");
  if (C <= 0 || eps <= 0) throw input_error("synth_product_two_layer: C and eps must be positive");

  ProductTwoLayerSynthesis out;
  out.delta = real_exp(-C / Real(d));

  // Per-coordinate log budget e_h: the final structural bound is
  // exp(d e_h) * d e_h, so shrink e_h until that clears eps with margin.
  Real e_budget = eps / (Real(d) * real_exp(Real(1)));
  while (real_exp(Real(d) * e_budget) * Real(d) * e_budget >= eps * Real(9) / 10) e_budget /= 2;

  LogSynthesis ls = synth_log_exp(out.delta, e_budget);
  out.log_unit = ls.net;
  out.log_error = ls.report.bound;

  const Eigen::Index m = static_cast<Eigen::Index>(ls.net.terms.size());
  LayeredNetwork net;
  net.d = d;
  // Layer 0: d disjoint copies of the log unit's exponentials.
  LayeredNetwork::Layer l0;
  l0.weights = MatrixR::Zero(d * m, d);
  l0.bias = VectorR::Zero(d * m);
  l0.activation = ActivationKind::Exp;
  // Layer 1: sum the nu-weighted exponentials across coordinates, then exp.
  LayeredNetwork::Layer l1;
  l1.weights = MatrixR::Zero(1, d * m);
  l1.bias = VectorR::Zero(1);
  l1.activation = ActivationKind::Exp;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      l0.weights(i * m + j, i) = ls.net.terms[j].w(0);
      l1.weights(0, i * m + j) = ls.net.terms[j].nu;
    }
  }
  LayeredNetwork::Layer l2;
  l2.weights = MatrixR::Zero(1, 1);
  l2.weights(0, 0) = 1;
  l2.bias = VectorR::Zero(1);
  l2.activation = ActivationKind::Identity;
  net.layers = {std::move(l0), std::move(l1), std::move(l2)};
  net.validate();
  out.net = std::move(net);

  // Proven pre-activation range of the output neuron: each h_hat(x_i) sits
  // within log_error of ln x_i in (-C/d, 0].
  out.inner_lo = -C - Real(d) * out.log_error;
  out.inner_hi = Real(d) * out.log_error;

  // Per-axis sweep: h_hat extremes bound the observed inner range, and the
  // diagonal gives a cheap measured sample of the full product error.
  const int N = 256;
  Real h_min = 0, h_max = 0, measured = 0;
  ExpSumFn h_hat(out.log_unit);
  const Real a = out.delta, b = Real(1);
  for (int i = 0; i <= N; ++i) {
    const Real t = a + (b - a) * Real(i + 1) / Real(N + 1);
    const Real ht = h_hat.eval(t);
    if (i == 0) {
      h_min = h_max = ht;
    } else {
      h_min = std::min(h_min, ht);
      h_max = std::max(h_max, ht);
    }
    VectorR x = VectorR::Constant(d, t);
    measured = std::max(measured, abs(evaluate(out.net, x) - pow(t, static_cast<int>(d))));
  }
  out.inner_seen_lo = Real(d) * h_min;
  out.inner_seen_hi = Real(d) * h_max;

  const Real bound = real_exp(Real(d) * out.log_error) * Real(d) * out.log_error;
  out.report.box = Box::cube(d, out.delta, Real(1));
  out.report.grid_spacing = (b - a) / Real(N + 1);
  out.report.grid_sup = measured;
  out.report.bound = bound;
  out.report.slack = bound - measured;
  out.report.certified = bound <= eps;
  out.report.method = "structural";
  out.report.stage = "product_two_layer";
  out.report.notes = "bound = exp(d*e_h)*d*e_h from the certified per-coordinate log error e_h";
  return out;
}

ShallowExpSum exact_smooth_stencil(unsigned d, const Real& h) {
  if (h <= 0) throw input_error("exact_smooth_stencil: step must be positive");
  ShallowExpSum net = ShallowExpSum::zero(static_cast<Eigen::Index>(d));
  const Real denom = pow(2 * h, static_cast<int>(d));
  // Corners s of {0,1}^d: nu = (-1)^{d-|s|} / (2h)^d, w = h(2s-1). The net
  // evaluates to prod_i sinh(h x_i)/h.
  for (std::size_t mask = 0; mask < (std::size_t(1) << d); ++mask) {
    unsigned ones = 0;
    VectorR w(d);
    for (unsigned i = 0; i < d; ++i) {
      const bool on = (mask >> i) & 1;
      ones += on;
      w(i) = on ? h : -h;
    }
    Real nu = Real(1) / denom;
    if ((d - ones) % 2 == 1) nu = -nu;
    net.add_term(std::move(nu), std::move(w));
  }
  return net;
}

ExactSmoothSynthesis synth_exact_smooth(unsigned d, const Real& eps, const Real& k) {
  if (d == 0) throw input_error("synth_exact_smooth: d must be positive");
  if (eps <= 0 || k <= 0) throw input_error("synth_exact_smooth: eps and k must be positive");
  if (d > 30) throw resource_error("synth_exact_smooth: 2^d terms is past any sane budget");

  ExactSmoothSynthesis out;
  out.stencil.degree = d;

  MonomialFn ident(1);
  Real h = std::min(Real(1), 1 / (2 * k));
  const Real gap = eps / 40;
  for (;;) {
    require_precision(Real(d) * log2_real(1 / (2 * h)), "synth_exact_smooth");
    // Certified univariate slice error u = sup |sinh(ht)/h - t| on [-k,k];
    // the product error telescopes: with G = k + u,
    //   sup |prod sinh(h x_i)/h - prod x_i| <= u * sum_{i<d} G^i k^{d-1-i}.
    ExpSumFn slice({Real(1) / (2 * h), Real(-1) / (2 * h)}, {h, -h});
    SupBound sb = certified_sup_diff(slice, ident, -k, k, gap / Real(d));
    const Real u = sb.bound;
    const Real G = k + u;
    Real total = 0;
    Real gi = 1;
    for (unsigned i = 0; i < d; ++i) {
      total += gi * pow(k, static_cast<int>(d - 1 - i));
      gi *= G;
    }
    total *= u;
    if (total < eps * Real(9) / 10) {
      out.net = exact_smooth_stencil(d, h);
      out.stencil.step = h;
      Box box = Box::cube(d, -k, k);
      const Eigen::Index per_dim =
          std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::floor(std::pow(4096.0, 1.0 / d))));
      Real measured =
          measured_sup_on_lattice(NetworkValue(out.net), TargetSpec{TargetKind::Product, 1}, box,
                                  per_dim, /*double_precision=*/false);
      out.report.box = std::move(box);
      out.report.grid_spacing = 2 * k / Real(per_dim - 1);
      out.report.grid_sup = measured;
      out.report.bound = total;
      out.report.slack = total - measured;
      out.report.certified = true;
      out.report.method = "structural";
      out.report.stage = "exact_smooth";
      out.report.notes = "factorized bound from the certified univariate sinh slice";
      return out;
    }
    h /= 2;
  }
}

}  // namespace mononet
