#pragma once

#include "mononet/scalar.hpp"

#include <optional>
#include <vector>

namespace mononet {

enum class ActivationKind { ReLU, Exp, Identity };

// Axis-aligned closed box, one interval per coordinate.
struct Box {
  VectorR lo;
  VectorR hi;

  Box() = default;
  Box(VectorR lo_, VectorR hi_);
  static Box cube(Eigen::Index d, const Real& lo, const Real& hi);

  Eigen::Index dim() const { return lo.size(); }
  Real width(Eigen::Index i) const { return hi(i) - lo(i); }

  // sup / inf of the linear form w.x over the box (closed form).
  Real sup_linear(const VectorR& w) const;
  Real inf_linear(const VectorR& w) const;
};

// One-hidden-layer exp network without biases: sum_i nu_i * exp(w_i . x).
struct ShallowExpSum {
  struct Term {
    Real nu;
    VectorR w;
  };

  Eigen::Index d = 1;
  std::vector<Term> terms;
  unsigned precision_bits_used = 256;

  static ShallowExpSum zero(Eigen::Index d);
  void add_term(Real nu, VectorR w);

  // Canonical form: deliberate pass merging terms with bit-identical weight
  // vectors; drops terms whose coefficient merged to exactly zero.
  void merge_terms();

  bool is_univariate() const { return d == 1; }
};

// General affine+activation network. Last layer must be Identity.
struct LayeredNetwork {
  struct Layer {
    MatrixR weights;  // rows = fan-out, cols = fan-in
    VectorR bias;
    ActivationKind activation = ActivationKind::ReLU;
  };

  Eigen::Index d = 1;
  std::vector<Layer> layers;

  Eigen::Index depth() const;  // number of hidden layers
  Eigen::Index width() const;  // max hidden layer size
  void validate() const;
};

Real evaluate(const ShallowExpSum& net, const VectorR& x);
Real evaluate(const LayeredNetwork& net, const VectorR& x);
double evaluate_double(const ShallowExpSum& net, const VectorD& x);
double evaluate_double(const LayeredNetwork& net, const VectorD& x);

// g(t) = net(t * direction); same depth, first layer becomes W * direction.
LayeredNetwork restrict_diagonal(const LayeredNetwork& net, const VectorR& direction);

// Valid global Lipschitz constants w.r.t. the euclidean norm on the box.
// ShallowExpSum: sum |nu_i| * ||w_i||_2 * exp(sup w_i.x). LayeredNetwork:
// product of Frobenius norms times per-layer activation derivative bounds
// (interval propagation supplies the exp pre-activation ranges).
Real lipschitz_upper_bound(const ShallowExpSum& net, const Box& box);
Real lipschitz_upper_bound(const LayeredNetwork& net, const Box& box);

// Double-precision copies used by the piecewise-linear machinery.
struct LayeredNetworkD {
  struct Layer {
    MatrixD weights;
    VectorD bias;
    ActivationKind activation;
  };
  Eigen::Index d = 1;
  std::vector<Layer> layers;
};
LayeredNetworkD to_double(const LayeredNetwork& net);
double evaluate(const LayeredNetworkD& net, const VectorD& x);

}  // namespace mononet
