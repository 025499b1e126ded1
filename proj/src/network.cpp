#include "mononet/network.hpp"

#include <map>
#include <sstream>

namespace mononet {

Box::Box(VectorR lo_, VectorR hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw input_error("box lo/hi dimension mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i)) throw input_error("box has lo > hi in coordinate " + std::to_string(i));
}

Box Box::cube(Eigen::Index d, const Real& lo, const Real& hi) {
  VectorR l = VectorR::Constant(d, lo);
  VectorR h = VectorR::Constant(d, hi);
  return Box(std::move(l), std::move(h));
}

Real Box::sup_linear(const VectorR& w) const {
  if (w.size() != dim()) throw input_error("sup_linear dimension mismatch");
  Real s(0);
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w(i) > 0 ? w(i) * hi(i) : w(i) * lo(i);
  return s;
}

Real Box::inf_linear(const VectorR& w) const {
  if (w.size() != dim()) throw input_error("inf_linear dimension mismatch");
  Real s(0);
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w(i) > 0 ? w(i) * lo(i) : w(i) * hi(i);
  return s;
}

ShallowExpSum ShallowExpSum::zero(Eigen::Index d) {
  ShallowExpSum s;
  s.d = d;
  s.precision_bits_used = precision_bits();
  return s;
}

void ShallowExpSum::add_term(Real nu, VectorR w) {
  if (w.size() != d) throw input_error("term weight vector has wrong dimension");
  terms.push_back(Term{std::move(nu), std::move(w)});
}

void ShallowExpSum::merge_terms() {
  std::map<std::string, Eigen::Index> seen;
  std::vector<Term> merged;
  merged.reserve(terms.size());
  for (auto& t : terms) {
    std::ostringstream key;
    for (Eigen::Index i = 0; i < t.w.size(); ++i) key << to_decimal_string(t.w(i)) << '|';
    auto [it, inserted] = seen.emplace(key.str(), static_cast<Eigen::Index>(merged.size()));
    if (inserted)
      merged.push_back(std::move(t));
    else
      merged[static_cast<std::size_t>(it->second)].nu += t.nu;
  }
  terms.clear();
  for (auto& t : merged)
    if (t.nu != 0) terms.push_back(std::move(t));
}

Eigen::Index LayeredNetwork::depth() const {
  return static_cast<Eigen::Index>(layers.size()) - 1;
}

Eigen::Index LayeredNetwork::width() const {
  Eigen::Index w = 0;
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) w = std::max(w, layers[i].weights.rows());
  return w;
}

void LayeredNetwork::validate() const {
  if (layers.size() < 2) throw input_error("layered network needs at least one hidden layer");
  if (layers.back().activation != ActivationKind::Identity)
    throw input_error("output layer activation must be identity");
  Eigen::Index fan_in = d;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.weights.cols() != fan_in)
      throw input_error("layer " + std::to_string(i) + " fan-in mismatch");
    if (l.bias.size() != l.weights.rows())
      throw input_error("layer " + std::to_string(i) + " bias size mismatch");
    if (i + 1 < layers.size() && l.activation == ActivationKind::Identity)
      throw input_error("identity activation only legal on the output layer");
    fan_in = l.weights.rows();
  }
}

namespace {

template <class Scalar>
Scalar activate(ActivationKind kind, const Scalar& v) {
  switch (kind) {
    case ActivationKind::ReLU:
      return v > Scalar(0) ? v : Scalar(0);
    case ActivationKind::Exp:
      using std::exp;
      return exp(v);
    case ActivationKind::Identity:
      return v;
  }
  throw input_error("unknown activation");
}

}  // namespace

Real evaluate(const ShallowExpSum& net, const VectorR& x) {
  if (x.size() != net.d) throw input_error("evaluate: input dimension mismatch");
  Real sum(0);
  for (std::size_t i = 0; i < net.terms.size(); ++i) {
    const auto& t = net.terms[i];
    Real e = exp(Real(t.w.dot(x)));
    if (!boost::multiprecision::isfinite(e))
      throw range_error("exp overflow in term " + std::to_string(i));
    sum += t.nu * e;
  }
  return sum;
}

double evaluate_double(const ShallowExpSum& net, const VectorD& x) {
  if (x.size() != net.d) throw input_error("evaluate: input dimension mismatch");
  std::vector<double> vals;
  vals.reserve(net.terms.size());
  for (std::size_t i = 0; i < net.terms.size(); ++i) {
    const auto& t = net.terms[i];
    double dot = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j) dot += t.w(j).convert_to<double>() * x(j);
    double v = t.nu.convert_to<double>() * std::exp(dot);
    if (!std::isfinite(v)) throw range_error("exp overflow in term " + std::to_string(i));
    vals.push_back(v);
  }
  return compensated_sum(vals);
}

Real evaluate(const LayeredNetwork& net, const VectorR& x) {
  if (x.size() != net.d) throw input_error("evaluate: input dimension mismatch");
  VectorR v = x;
  for (const auto& l : net.layers) {
    VectorR pre = l.weights * v + l.bias;
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
      pre(i) = activate(l.activation, pre(i));
      if (!boost::multiprecision::isfinite(pre(i)))
        throw range_error("activation overflow at neuron " + std::to_string(i));
    }
    v = std::move(pre);
  }
  if (v.size() != 1) throw input_error("network output is not scalar");
  return v(0);
}

double evaluate_double(const LayeredNetwork& net, const VectorD& x) {
  return evaluate(to_double(net), x);
}

LayeredNetworkD to_double(const LayeredNetwork& net) {
  LayeredNetworkD out;
  out.d = net.d;
  out.layers.reserve(net.layers.size());
  for (const auto& l : net.layers) {
    LayeredNetworkD::Layer ld;
    ld.weights = l.weights.unaryExpr([](const Real& r) { return r.convert_to<double>(); });
    ld.bias = l.bias.unaryExpr([](const Real& r) { return r.convert_to<double>(); });
    ld.activation = l.activation;
    out.layers.push_back(std::move(ld));
  }
  return out;
}

double evaluate(const LayeredNetworkD& net, const VectorD& x) {
  if (x.size() != net.d) throw input_error("evaluate: input dimension mismatch");
  VectorD v = x;
  for (const auto& l : net.layers) {
    VectorD pre = l.weights * v + l.bias;
    for (Eigen::Index i = 0; i < pre.size(); ++i) pre(i) = activate(l.activation, pre(i));
    v = std::move(pre);
  }
  return v(0);
}

LayeredNetwork restrict_diagonal(const LayeredNetwork& net, const VectorR& direction) {
  if (direction.size() != net.d) throw input_error("direction dimension mismatch");
  if (direction.isZero()) throw input_error("direction must be non-zero");
  LayeredNetwork g = net;
  g.d = 1;
  g.layers.front().weights = net.layers.front().weights * direction;
  return g;
}

Real lipschitz_upper_bound(const ShallowExpSum& net, const Box& box) {
  if (box.dim() != net.d) throw input_error("box dimension mismatch");
  Real lam(0);
  for (const auto& t : net.terms) {
    Real norm = sqrt(Real(t.w.squaredNorm()));
    lam += abs(t.nu) * norm * exp(box.sup_linear(t.w));
  }
  return lam;
}

Real lipschitz_upper_bound(const LayeredNetwork& net, const Box& box) {
  if (box.dim() != net.d) throw input_error("box dimension mismatch");
  // Interval propagation gives each layer's pre-activation range; the layer
  // contributes ||W||_F * sup |sigma'| on that range.
  VectorR lo = box.lo, hi = box.hi;
  Real lam(1);
  for (const auto& l : net.layers) {
    Real fro(0);
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) fro += l.weights(i, j) * l.weights(i, j);
    lam *= sqrt(fro);

    VectorR nlo(l.weights.rows()), nhi(l.weights.rows());
    Real max_deriv(0);
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      Real a = l.bias(i), b = l.bias(i);
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) {
        const Real& w = l.weights(i, j);
        if (w > 0) {
          a += w * lo(j);
          b += w * hi(j);
        } else {
          a += w * hi(j);
          b += w * lo(j);
        }
      }
      switch (l.activation) {
        case ActivationKind::ReLU:
          nlo(i) = a > 0 ? a : Real(0);
          nhi(i) = b > 0 ? b : Real(0);
          max_deriv = std::max(max_deriv, Real(1));
          break;
        case ActivationKind::Exp:
          nlo(i) = exp(a);
          nhi(i) = exp(b);
          max_deriv = std::max(max_deriv, nhi(i));
          break;
        case ActivationKind::Identity:
          nlo(i) = a;
          nhi(i) = b;
          max_deriv = std::max(max_deriv, Real(1));
          break;
      }
    }
    lam *= max_deriv;
    lo = std::move(nlo);
    hi = std::move(nhi);
  }
  return lam;
}

}  // namespace mononet
