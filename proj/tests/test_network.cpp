#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mononet/network.hpp"

#include <random>

using namespace mononet;

namespace {

LayeredNetwork random_relu_net(std::mt19937& rng, Eigen::Index d, int hidden_layers, int width) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  LayeredNetwork net;
  net.d = d;
  Eigen::Index fan_in = d;
  for (int l = 0; l < hidden_layers; ++l) {
    LayeredNetwork::Layer layer;
    layer.weights = MatrixR(width, fan_in);
    layer.bias = VectorR(width);
    for (Eigen::Index i = 0; i < width; ++i) {
      layer.bias(i) = Real(U(rng));
      for (Eigen::Index j = 0; j < fan_in; ++j) layer.weights(i, j) = Real(U(rng));
    }
    layer.activation = ActivationKind::ReLU;
    net.layers.push_back(std::move(layer));
    fan_in = width;
  }
  LayeredNetwork::Layer top;
  top.weights = MatrixR(1, fan_in);
  top.bias = VectorR(1);
  top.bias(0) = Real(U(rng));
  for (Eigen::Index j = 0; j < fan_in; ++j) top.weights(0, j) = Real(U(rng));
  top.activation = ActivationKind::Identity;
  net.layers.push_back(std::move(top));
  return net;
}

}  // namespace

TEST_CASE("box linear form extremes") {
  Box box = Box::cube(2, Real(-1), Real(2));
  VectorR w(2);
  w << Real(3), Real(-1);
  CHECK(box.sup_linear(w) == Real(7));   // 3*2 + (-1)*(-1)
  CHECK(box.inf_linear(w) == Real(-5));  // 3*(-1) + (-1)*2
}

TEST_CASE("shallow exp sum evaluates sum of exponentials") {
  ShallowExpSum net = ShallowExpSum::zero(2);
  VectorR w1(2), w2(2);
  w1 << Real(1), Real(0);
  w2 << Real(0), Real(-1);
  net.add_term(Real(2), w1);
  net.add_term(Real(-3), w2);
  VectorR x(2);
  x << Real("0.5"), Real("0.25");
  const Real want = 2 * exp(Real("0.5")) - 3 * exp(Real("-0.25"));
  CHECK(abs(evaluate(net, x) - want) < Real("1e-70"));
}

TEST_CASE("merge_terms folds identical weights and drops zeros") {
  ShallowExpSum net = ShallowExpSum::zero(1);
  VectorR w(1);
  w(0) = Real("0.5");
  net.add_term(Real(1), w);
  net.add_term(Real(2), w);
  w(0) = Real(3);
  net.add_term(Real(1), w);
  net.add_term(Real(-1), w);
  net.merge_terms();
  REQUIRE(net.terms.size() == 1);
  CHECK(net.terms[0].nu == Real(3));
  CHECK(net.terms[0].w(0) == Real("0.5"));
}

TEST_CASE("restrict_diagonal matches full evaluation on the line") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    LayeredNetwork net = random_relu_net(rng, 3, 2, 4);
    VectorR dir(3);
    dir << Real(U(rng)), Real(U(rng)), Real(1 + std::abs(U(rng)));
    LayeredNetwork line = restrict_diagonal(net, dir);
    CHECK(line.d == 1);
    for (int i = 0; i < 20; ++i) {
      const Real t = Real(U(rng));
      VectorR x = dir * t;
      VectorR tv(1);
      tv(0) = t;
      CHECK(abs(evaluate(net, x) - evaluate(line, tv)) < Real("1e-60"));
    }
  }
}

TEST_CASE("lipschitz bound is sound for shallow exp sums") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ShallowExpSum net = ShallowExpSum::zero(2);
  for (int i = 0; i < 5; ++i) {
    VectorR w(2);
    w << Real(U(rng)), Real(U(rng));
    net.add_term(Real(2 * U(rng)), w);
  }
  Box box = Box::cube(2, Real(-1), Real(1));
  const Real lam = lipschitz_upper_bound(net, box);
  for (int i = 0; i < 2000; ++i) {
    VectorR x(2), y(2);
    x << Real(U(rng)), Real(U(rng));
    y << Real(U(rng)), Real(U(rng));
    const Real lhs = abs(evaluate(net, x) - evaluate(net, y));
    const Real dist = sqrt((x - y).squaredNorm());
    CHECK(lhs <= lam * dist + Real("1e-50"));
  }
}

TEST_CASE("lipschitz bound is sound for relu nets") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    LayeredNetwork net = random_relu_net(rng, 2, 2, 3);
    Box box = Box::cube(2, Real(-1), Real(1));
    const Real lam = lipschitz_upper_bound(net, box);
    for (int i = 0; i < 2000; ++i) {
      VectorR x(2), y(2);
      x << Real(U(rng)), Real(U(rng));
      y << Real(U(rng)), Real(U(rng));
      const Real lhs = abs(evaluate(net, x) - evaluate(net, y));
      const Real dist = sqrt((x - y).squaredNorm());
      CHECK(lhs <= lam * dist + Real("1e-50"));
    }
  }
}

TEST_CASE("validate rejects mismatched shapes") {
  LayeredNetwork net;
  net.d = 2;
  LayeredNetwork::Layer l;
  l.weights = MatrixR::Zero(3, 1);  // fan-in should be 2
  l.bias = VectorR::Zero(3);
  l.activation = ActivationKind::ReLU;
  net.layers.push_back(l);
  LayeredNetwork::Layer top;
  top.weights = MatrixR::Zero(1, 3);
  top.bias = VectorR::Zero(1);
  top.activation = ActivationKind::Identity;
  net.layers.push_back(top);
  CHECK_THROWS_AS(net.validate(), input_error);
}

TEST_CASE("double path tracks extended precision") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  LayeredNetwork net = random_relu_net(rng, 2, 1, 4);
  LayeredNetworkD nd = to_double(net);
  for (int i = 0; i < 50; ++i) {
    VectorD x(2);
    x << U(rng), U(rng);
    VectorR xr(2);
    xr << Real(x(0)), Real(x(1));
    CHECK(std::abs(evaluate(nd, x) - evaluate(net, xr).convert_to<double>()) < 1e-12);
  }
}
