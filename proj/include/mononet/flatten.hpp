#pragma once

#include "mononet/certify.hpp"
#include "mononet/synthesis.hpp"

namespace mononet {

struct FlattenBudget {
  std::size_t max_terms = 2000000;    // pre-merge multinomial term cap
  std::size_t max_neurons = 5000000;  // ReLU conversion cap
  Real prune_threshold{0};            // drop terms whose sup over the box is below this
};

struct ExpPolyApprox {
  PolynomialCoeffs poly;
  unsigned degree = 0;
  Real degree_cap{0};  // ceil(4 (b-a) e^3 / eps^3), for the record
  Real bound{0};       // certified sup |poly - e^t| on [a,b]
};

// Minimal-degree polynomial approximation of e^t on [a,b] (Chebyshev nodes,
// Newton divided differences, certified by branch-and-bound).
ExpPolyApprox approx_exp_poly(const Real& a, const Real& b, const Real& eps);

struct CompositionResult {
  ShallowExpSum net;
  Real pre_merge_count{0};  // binom(n+r, r): multi-indices before merging
  Real pruned_mass{0};      // rigorous sup bound on everything dropped
};

// p(f(x)) for a shallow exp sum f, expanded exactly: each power
// (sum nu_j e^{w_j.x})^i splits into multinomial terms with weight
// u = sum k_j w_j, so the composite is again a shallow exp sum.
CompositionResult compose_poly_with_shallow(const PolynomialCoeffs& p, const ShallowExpSum& f,
                                            const FlattenBudget& budget, const Box& box);

struct FlattenResult {
  ShallowExpSum net;
  ExpPolyApprox exp_poly;
  Real inner_lo{0}, inner_hi{0};  // interval enclosure of the inner sum over the box
  Real pre_merge_count{0};
  Real pruned_mass{0};
  CertifiedErrorReport report;  // |flat - layered| <= |out_w| (poly error + pruned mass)
};

// Collapses exp(inner exp sum) into one shallow exp layer.
FlattenResult flatten_two_layer(const LayeredNetwork& net, const Box& box, const Real& eps,
                                const FlattenBudget& budget = {});

struct ReluUnivariate {
  LayeredNetwork net;  // single ReLU hidden layer, 1-d input
  std::size_t neurons = 0;
  Real bound{0};  // exact sup of the interpolation error on [c1, c2]
};

// CPWL interpolation of t -> nu e^t on [c1, c2], knots uniform in the range
// of the function so each segment's deviation is at most one range step.
ReluUnivariate exp_to_relu_univariate(const Real& nu, const Real& c1, const Real& c2,
                                      const Real& eps);

struct ReluConversion {
  LayeredNetwork net;
  std::size_t neurons = 0;
  Real c2_constant{0};  // max_i |nu_i| exp(C1_i)
  Real neuron_cap{0};   // ceil(2 n^2 C2 / eps)
  Real bound{0};        // sum of per-term interpolation bounds
  CertifiedErrorReport report;
};

// Shallow exp sum -> shallow ReLU net on the box; every exp term is handled
// as a univariate function of its pre-activation with budget eps/n.
ReluConversion exp_to_relu_shallow(const ShallowExpSum& f, const Box& box, const Real& eps,
                                   const FlattenBudget& budget = {});

struct ProductReluSynthesis {
  ProductTwoLayerSynthesis two_layer;
  FlattenResult flat;
  ReluConversion relu;
  Real delta{0};
  Real bound{0};       // stage sum, valid on [delta, 1]^d
  Real measured01{0};  // sampled sup on [0,1]^d (no certificate there)
  std::vector<CertifiedErrorReport> stages;
};

// Full pipeline: two exp layers -> flat exp layer -> shallow ReLU net, each
// stage with an eps/3 budget.
ProductReluSynthesis synth_product_shallow_relu(unsigned d, const Real& C, const Real& eps,
                                                const FlattenBudget& budget = {});

}  // namespace mononet
