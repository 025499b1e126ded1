#include "mononet/flatten.hpp"

#include "mononet/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mononet {

namespace {

// Chebyshev interpolant of e^t of the given degree, monomial basis.
std::vector<Real> exp_chebyshev_poly(const Real& a, const Real& b, unsigned degree) {
  const std::size_t m = degree + 1;
  const Real mid = (a + b) / 2, rad = (b - a) / 2;
  const Real pi = 4 * atan(Real(1));
  std::vector<Real> t(m), fv(m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = mid + rad * cos(pi * Real(2 * i + 1) / Real(2 * m));
    fv[i] = exp(t[i]);
  }
  // Newton divided differences.
  std::vector<Real> dd = fv;
  for (std::size_t level = 1; level < m; ++level)
    for (std::size_t i = m - 1; i >= level; --i)
      dd[i] = (dd[i] - dd[i - 1]) / (t[i] - t[i - level]);
  // Horner-expand the Newton form into monomial coefficients.
  std::vector<Real> coef(m, Real(0)), basis{Real(1)};
  basis.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) coef[j] += dd[i] * basis[j];
    if (i + 1 < m) {
      basis.push_back(Real(0));
      for (std::size_t j = basis.size() - 1; j > 0; --j)
        basis[j] = basis[j - 1] - t[i] * basis[j];
      basis[0] = -t[i] * basis[0];
    }
  }
  return coef;
}

Real exp_poly_certified_error(const std::vector<Real>& coef, const Real& a, const Real& b,
                              const Real& gap) {
  PolyFn p(coef);
  ScaledExpFn target(Real(1));
  return certified_sup_diff(p, target, a, b, gap).bound;
}

}  // namespace

ExpPolyApprox approx_exp_poly(const Real& a, const Real& b, const Real& eps) {
  if (eps <= 0) throw input_error("approx_exp_poly: eps must be positive");
  if (a > b) throw input_error("approx_exp_poly: empty interval");
  ExpPolyApprox out;
  out.degree_cap = ceil(4 * (b - a) * exp(Real(3)) / (eps * eps * eps));
  if (a == b) {
    out.poly = PolynomialCoeffs::from({exp(a)});
    return out;
  }
  const Real gap = eps / 20;
  unsigned hi = 1;
  std::vector<Real> coef_hi = exp_chebyshev_poly(a, b, hi);
  Real err_hi = exp_poly_certified_error(coef_hi, a, b, gap);
  while (err_hi >= eps) {
    if (hi > 4096) throw synthesis_error("approx_exp_poly: degree escalation diverged");
    hi *= 2;
    coef_hi = exp_chebyshev_poly(a, b, hi);
    err_hi = exp_poly_certified_error(coef_hi, a, b, gap);
  }
  unsigned lo = hi / 2;
  while (hi - lo > 1) {
    const unsigned mid = lo + (hi - lo) / 2;
    std::vector<Real> coef_mid = exp_chebyshev_poly(a, b, mid);
    Real err_mid = exp_poly_certified_error(coef_mid, a, b, gap);
    if (err_mid < eps) {
      hi = mid;
      coef_hi = std::move(coef_mid);
      err_hi = err_mid;
    } else {
      lo = mid;
    }
  }
  out.poly = PolynomialCoeffs::from(std::move(coef_hi));
  out.degree = hi;
  out.bound = err_hi;
  return out;
}

CompositionResult compose_poly_with_shallow(const PolynomialCoeffs& p, const ShallowExpSum& f,
                                            const FlattenBudget& budget, const Box& box) {
  if (p.a.empty()) throw input_error("compose_poly_with_shallow: empty polynomial");
  if (box.dim() != f.d) throw input_error("compose_poly_with_shallow: box dimension mismatch");

  CompositionResult out;
  const std::size_t n = f.terms.size();
  const unsigned r = p.degree();
  out.pre_merge_count = binomial_real(static_cast<unsigned>(n + r), r);
  if (out.pre_merge_count > Real(budget.max_terms)) {
    std::ostringstream os;
    os << "compose_poly_with_shallow: " << out.pre_merge_count.str(6)
       << " pre-merge terms exceed the budget of " << budget.max_terms
       << "; loosen eps or raise the term budget";
    throw resource_error(os.str());
  }

  out.net = ShallowExpSum::zero(f.d);
  // Enumerate multi-indices k with |k| = i for each non-zero coefficient;
  // mu accumulates a_i * i! / prod k_j! * prod nu_j^{k_j} incrementally.
  std::function<void(std::size_t, unsigned, const Real&, const VectorR&)> descend =
      [&](std::size_t j, unsigned rem, const Real& mu, const VectorR& u) {
        if (j == n) {
          if (rem == 0) out.net.add_term(mu, u);
          return;
        }
        Real mu_k = mu;
        VectorR u_k = u;
        for (unsigned k = 0; k <= rem; ++k) {
          if (k > 0) {
            mu_k = mu_k * f.terms[j].nu / Real(k);
            u_k += f.terms[j].w;
          }
          descend(j + 1, rem - k, mu_k, u_k);
        }
      };
  for (unsigned i = 0; i < p.a.size(); ++i) {
    if (p.a[i] == 0) continue;
    descend(0, i, p.a[i] * factorial_real(i), VectorR::Zero(f.d));
  }
  out.net.merge_terms();

  if (budget.prune_threshold > 0) {
    std::vector<ShallowExpSum::Term> kept;
    kept.reserve(out.net.terms.size());
    for (auto& term : out.net.terms) {
      const Real sup = abs(term.nu) * exp(box.sup_linear(term.w));
      if (sup < budget.prune_threshold)
        out.pruned_mass += sup;
      else
        kept.push_back(std::move(term));
    }
    out.net.terms = std::move(kept);
  }
  return out;
}

FlattenResult flatten_two_layer(const LayeredNetwork& net, const Box& box, const Real& eps,
                                const FlattenBudget& budget) {
  net.validate();
  if (net.layers.size() != 3 || net.layers[0].activation != ActivationKind::Exp ||
      net.layers[1].activation != ActivationKind::Exp)
    throw input_error("flatten_two_layer: expected exp/exp/identity layers");
  if (net.layers[1].weights.rows() != 1 || net.layers[2].weights.size() != 1)
    throw input_error("flatten_two_layer: expected a single output neuron");
  if (eps <= 0) throw input_error("flatten_two_layer: eps must be positive");

  // Inner pre-activation of the output exp neuron:
  //   g(x) = sum_j nu_j e^{b0_j} e^{w_j.x} + b1,
  // itself a shallow exp sum (the constant rides on a w = 0 term).
  ShallowExpSum inner = ShallowExpSum::zero(net.d);
  const auto& l0 = net.layers[0];
  const auto& l1 = net.layers[1];
  for (Eigen::Index j = 0; j < l0.weights.rows(); ++j) {
    VectorR w = l0.weights.row(j).transpose();
    inner.add_term(l1.weights(0, j) * exp(l0.bias(j)), std::move(w));
  }
  if (l1.bias(0) != 0) inner.add_term(l1.bias(0), VectorR::Zero(net.d));
  inner.merge_terms();

  FlattenResult out;
  for (const auto& term : inner.terms) {
    const Real e_lo = exp(box.inf_linear(term.w)), e_hi = exp(box.sup_linear(term.w));
    out.inner_lo += term.nu > 0 ? term.nu * e_lo : term.nu * e_hi;
    out.inner_hi += term.nu > 0 ? term.nu * e_hi : term.nu * e_lo;
  }

  // Per-term intervals ignore the cancellation inside axis-aligned groups
  // (synthesized stencils have coefficients orders of magnitude above their
  // sum), which would blow up the exp-poly degree. When every term rides on
  // a single coordinate, certify sup |g_i| per axis instead and keep the
  // tighter enclosure.
  {
    bool separable = true;
    std::vector<std::vector<std::size_t>> by_axis(net.d);
    Real constant = 0;
    for (std::size_t idx = 0; idx < inner.terms.size() && separable; ++idx) {
      const auto& term = inner.terms[idx];
      Eigen::Index axis = -1;
      for (Eigen::Index i = 0; i < net.d; ++i) {
        if (term.w(i) == 0) continue;
        if (axis >= 0) {
          separable = false;
          break;
        }
        axis = i;
      }
      if (axis < 0)
        constant += term.nu;
      else if (separable)
        by_axis[axis].push_back(idx);
    }
    if (separable) {
      Real lo = constant, hi = constant;
      for (Eigen::Index i = 0; i < net.d; ++i) {
        if (by_axis[i].empty()) continue;
        std::vector<Real> nu, w;
        for (std::size_t idx : by_axis[i]) {
          nu.push_back(inner.terms[idx].nu);
          w.push_back(inner.terms[idx].w(i));
        }
        ExpSumFn g(std::move(nu), std::move(w));
        // Sampled midpoint + certified sup |g - mid| encloses the range of
        // g_i with at most the certification slack of overshoot.
        Real smin = 0, smax = 0;
        for (int s = 0; s <= 64; ++s) {
          const Real t = box.lo(i) + box.width(i) * Real(s) / 64;
          const Real v = g.eval(t);
          if (s == 0) smin = smax = v;
          smin = std::min(smin, v);
          smax = std::max(smax, v);
        }
        const Real mid = (smin + smax) / 2;
        PolyFn midfn({mid});
        const Real rad = certified_sup_diff(g, midfn, box.lo(i), box.hi(i), eps / 10).bound;
        lo += mid - rad;
        hi += mid + rad;
      }
      out.inner_lo = std::max(out.inner_lo, lo);
      out.inner_hi = std::min(out.inner_hi, hi);
    }
  }

  const Real out_w = net.layers[2].weights(0, 0);
  const Real out_b = net.layers[2].bias(0);
  const Real scale = std::max(Real(1), abs(out_w));

  out.exp_poly = approx_exp_poly(out.inner_lo, out.inner_hi, eps * Real(9) / (10 * scale));
  CompositionResult comp = compose_poly_with_shallow(out.exp_poly.poly, inner, budget, box);
  out.pre_merge_count = comp.pre_merge_count;
  out.pruned_mass = comp.pruned_mass;

  out.net = ShallowExpSum::zero(net.d);
  for (const auto& term : comp.net.terms) out.net.add_term(out_w * term.nu, term.w);
  if (out_b != 0) out.net.add_term(out_b, VectorR::Zero(net.d));
  out.net.merge_terms();

  const Real bound = abs(out_w) * (out.exp_poly.bound + out.pruned_mass);
  // Measured check on a small lattice (both nets evaluated in extended
  // precision; the flat net cancels hard).
  const Eigen::Index per_dim = std::max<Eigen::Index>(
      2, static_cast<Eigen::Index>(std::floor(std::pow(2048.0, 1.0 / double(net.d)))));
  Real measured = 0;
  std::vector<Eigen::Index> idx(net.d, 0);
  VectorR x(net.d);
  for (;;) {
    for (Eigen::Index i = 0; i < net.d; ++i)
      x(i) = box.lo(i) + box.width(i) * Real(idx[i]) / Real(per_dim - 1);
    measured = std::max(measured, abs(evaluate(out.net, x) - evaluate(net, x)));
    Eigen::Index i = 0;
    while (i < net.d && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == net.d) break;
  }

  out.report.box = box;
  out.report.grid_spacing = box.width(0) / Real(per_dim - 1);
  out.report.grid_sup = measured;
  out.report.bound = bound;
  out.report.slack = bound - measured;
  out.report.certified = bound <= eps;
  out.report.method = "structural";
  out.report.stage = "flatten";
  out.report.notes = "bound = |out_w| * (exp-poly error + pruned mass)";
  return out;
}

ReluUnivariate exp_to_relu_univariate(const Real& nu, const Real& c1, const Real& c2,
                                      const Real& eps) {
  if (c1 > c2) throw input_error("exp_to_relu_univariate: empty interval");
  if (eps <= 0) throw input_error("exp_to_relu_univariate: eps must be positive");

  ReluUnivariate out;
  out.net.d = 1;
  if (nu == 0 || c1 == c2) {
    LayeredNetwork::Layer hidden;
    hidden.weights = MatrixR::Zero(1, 1);
    hidden.bias = VectorR::Zero(1);
    hidden.activation = ActivationKind::ReLU;
    LayeredNetwork::Layer top;
    top.weights = MatrixR::Zero(1, 1);
    top.bias = VectorR::Constant(1, nu == 0 ? Real(0) : nu * exp(c1));
    top.activation = ActivationKind::Identity;
    out.net.layers = {std::move(hidden), std::move(top)};
    out.neurons = 1;
    return out;
  }

  const Real mag = abs(nu);
  const Real sign = nu > 0 ? Real(1) : Real(-1);
  // Knots uniform in the *range* of mag*e^t so each segment moves the value
  // by exactly span/N <= eps; monotonicity then caps the chord deviation by
  // that step, and the exact per-segment max tightens it further.
  const Real y_lo = mag * exp(c1), y_hi = mag * exp(c2);
  const Real span = y_hi - y_lo;
  Real n_real = ceil(span / eps);
  if (n_real < 1) n_real = 1;
  if (n_real > Real(100000000))
    throw resource_error("exp_to_relu_univariate: knot count exceeds 1e8; loosen eps");
  const std::size_t N = n_real.convert_to<std::size_t>();

  std::vector<Real> t(N + 1), y(N + 1);
  for (std::size_t j = 0; j <= N; ++j) {
    y[j] = y_lo + span * Real(j) / Real(N);
    t[j] = log(y[j] / mag);
  }
  t.front() = c1;
  t.back() = c2;

  LayeredNetwork::Layer hidden;
  hidden.weights = MatrixR::Ones(N, 1);
  hidden.bias = VectorR(N);
  hidden.activation = ActivationKind::ReLU;
  LayeredNetwork::Layer top;
  top.weights = MatrixR::Zero(1, N);
  top.bias = VectorR::Constant(1, sign * y_lo);
  top.activation = ActivationKind::Identity;

  Real prev_slope = 0;
  for (std::size_t j = 0; j < N; ++j) {
    hidden.bias(j) = -t[j];
    const Real slope = (y[j + 1] - y[j]) / (t[j + 1] - t[j]);
    top.weights(0, j) = sign * (slope - prev_slope);
    // Chord sits above the convex mag*e^t; the gap peaks where the
    // derivative matches the chord slope, at t* = ln(slope/mag).
    const Real ts = log(slope / mag);
    const Real gap = y[j] + slope * (ts - t[j]) - mag * exp(ts);
    out.bound = std::max(out.bound, gap);
    prev_slope = slope;
  }
  out.net.layers = {std::move(hidden), std::move(top)};
  out.neurons = N;
  return out;
}

ReluConversion exp_to_relu_shallow(const ShallowExpSum& f, const Box& box, const Real& eps,
                                   const FlattenBudget& budget) {
  if (box.dim() != f.d) throw input_error("exp_to_relu_shallow: box dimension mismatch");
  if (eps <= 0) throw input_error("exp_to_relu_shallow: eps must be positive");

  ReluConversion out;
  Real out_bias = 0;
  struct Piece {
    const ShallowExpSum::Term* term;
    Real c1;
  };
  std::vector<Piece> pieces;
  for (const auto& term : f.terms) {
    if (term.w.isZero(0)) {
      out_bias += term.nu;  // constants convert exactly
      continue;
    }
    const Real c1 = std::max(abs(box.sup_linear(term.w)), abs(box.inf_linear(term.w)));
    pieces.push_back({&term, c1});
  }

  const std::size_t n = pieces.size();
  const Real per_term = n > 0 ? eps / Real(n) : eps;
  Real estimate = 0;
  for (const auto& pc : pieces) {
    out.c2_constant = std::max(out.c2_constant, abs(pc.term->nu) * exp(pc.c1));
    estimate += ceil(abs(pc.term->nu) * (exp(pc.c1) - exp(-pc.c1)) / per_term) + 1;
  }
  out.neuron_cap = n > 0 ? ceil(2 * Real(n) * Real(n) * out.c2_constant / eps) : Real(0);
  if (estimate > Real(budget.max_neurons)) {
    std::ostringstream os;
    os << "exp_to_relu_shallow: about " << estimate.str(6) << " neurons needed, budget is "
       << budget.max_neurons << "; loosen eps or raise the neuron budget";
    throw synthesis_error(os.str());
  }

  std::vector<ReluUnivariate> slices;
  slices.reserve(n);
  std::size_t total = 0;
  for (const auto& pc : pieces) {
    slices.push_back(exp_to_relu_univariate(pc.term->nu, -pc.c1, pc.c1, per_term));
    total += slices.back().neurons;
    out.bound += slices.back().bound;
    out_bias += slices.back().net.layers[1].bias(0);
  }

  out.net.d = f.d;
  LayeredNetwork::Layer hidden;
  hidden.weights = MatrixR::Zero(std::max<std::size_t>(total, 1), f.d);
  hidden.bias = VectorR::Zero(std::max<std::size_t>(total, 1));
  hidden.activation = ActivationKind::ReLU;
  LayeredNetwork::Layer top;
  top.weights = MatrixR::Zero(1, std::max<std::size_t>(total, 1));
  top.bias = VectorR::Constant(1, out_bias);
  top.activation = ActivationKind::Identity;
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sl = slices[i];
    for (std::size_t j = 0; j < sl.neurons; ++j, ++row) {
      hidden.weights.row(row) = pieces[i].term->w.transpose();
      hidden.bias(row) = sl.net.layers[0].bias(j);
      top.weights(0, row) = sl.net.layers[1].weights(0, j);
    }
  }
  out.net.layers = {std::move(hidden), std::move(top)};
  out.net.validate();
  out.neurons = total;

  const Eigen::Index per_dim = std::max<Eigen::Index>(
      2, static_cast<Eigen::Index>(std::floor(std::pow(1024.0, 1.0 / double(f.d)))));
  Real measured = 0;
  std::vector<Eigen::Index> idx(f.d, 0);
  VectorR x(f.d);
  for (;;) {
    for (Eigen::Index i = 0; i < f.d; ++i)
      x(i) = box.lo(i) + box.width(i) * Real(idx[i]) / Real(per_dim - 1);
    measured = std::max(measured, abs(evaluate(out.net, x) - evaluate(f, x)));
    Eigen::Index i = 0;
    while (i < f.d && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == f.d) break;
  }

  out.report.box = box;
  out.report.grid_spacing = box.width(0) / Real(per_dim - 1);
  out.report.grid_sup = measured;
  out.report.bound = out.bound;
  out.report.slack = out.bound - measured;
  out.report.certified = out.bound <= eps;
  out.report.method = "structural";
  out.report.stage = "exp_to_relu";
  out.report.notes = "sum of exact per-segment chord gaps, one univariate slice per exp term";
  return out;
}

ProductReluSynthesis synth_product_shallow_relu(unsigned d, const Real& C, const Real& eps,
                                                const FlattenBudget& budget) {
  if (d == 0) throw input_error("synth_product_shallow_relu: d must be positive");
  if (C <= 0 || eps <= 0)
    throw input_error("synth_product_shallow_relu: C and eps must be positive");

  ProductReluSynthesis out;
  const Real stage_eps = eps / 3;
  out.two_layer = synth_product_two_layer(d, C, stage_eps);
  out.delta = out.two_layer.delta;
  const Box box = Box::cube(d, out.delta, Real(1));

  out.flat = flatten_two_layer(out.two_layer.net, box, stage_eps, budget);
  out.relu = exp_to_relu_shallow(out.flat.net, box, stage_eps, budget);
  out.bound = out.two_layer.report.bound + out.flat.report.bound + out.relu.report.bound;

  // The certificate lives on [delta,1]^d; outside it only a sampled figure
  // is honest (the ReLU net extrapolates linearly toward 0).
  const Eigen::Index per_dim = std::min<Eigen::Index>(
      200, std::max<Eigen::Index>(
               2, static_cast<Eigen::Index>(std::floor(std::pow(20000.0, 1.0 / double(d))))));
  LayeredNetworkD relu_d = to_double(out.relu.net);
  std::vector<Eigen::Index> idx(d, 0);
  VectorD x(d);
  double worst = 0;
  for (;;) {
    double prod = 1;
    for (unsigned i = 0; i < d; ++i) {
      x(i) = double(idx[i]) / double(per_dim - 1);
      prod *= x(i);
    }
    worst = std::max(worst, std::abs(evaluate(relu_d, x) - prod));
    Eigen::Index i = 0;
    while (i < static_cast<Eigen::Index>(d) && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == static_cast<Eigen::Index>(d)) break;
  }
  out.measured01 = Real(worst);

  out.stages = {out.two_layer.report, out.flat.report, out.relu.report};
  CertifiedErrorReport whole;
  whole.box = Box::cube(d, Real(0), Real(1));
  whole.grid_spacing = Real(1) / Real(per_dim - 1);
  whole.grid_sup = out.measured01;
  whole.bound = 0;
  whole.slack = 0;
  whole.certified = false;
  whole.method = "measured_only";
  whole.stage = "relu_pipeline_unit_cube";
  whole.notes = "certified bound holds on [delta,1]^d only";
  out.stages.push_back(std::move(whole));
  return out;
}

}  // namespace mononet
