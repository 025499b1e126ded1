#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mononet/certify.hpp"

#include "mononet/synthesis.hpp"
#include "piece_oracle.hpp"

#include <random>

using namespace mononet;

namespace {

LayeredNetworkD random_relu_net_d(std::mt19937& rng, int width, int hidden_layers) {
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  LayeredNetworkD net;
  net.d = 1;
  Eigen::Index fan_in = 1;
  for (int l = 0; l < hidden_layers; ++l) {
    LayeredNetworkD::Layer layer;
    layer.weights = MatrixD::NullaryExpr(width, fan_in, [&] { return U(rng); });
    layer.bias = VectorD::NullaryExpr(width, [&] { return U(rng); });
    layer.activation = ActivationKind::ReLU;
    net.layers.push_back(std::move(layer));
    fan_in = width;
  }
  LayeredNetworkD::Layer top;
  top.weights = MatrixD::NullaryExpr(1, fan_in, [&] { return U(rng); });
  top.bias = VectorD::NullaryExpr(1, [&] { return U(rng); });
  top.activation = ActivationKind::Identity;
  net.layers.push_back(std::move(top));
  return net;
}

LayeredNetwork zero_net(Eigen::Index d) {
  LayeredNetwork net;
  net.d = d;
  LayeredNetwork::Layer hidden;
  hidden.weights = MatrixR::Zero(1, d);
  hidden.bias = VectorR::Zero(1);
  hidden.activation = ActivationKind::ReLU;
  LayeredNetwork::Layer top;
  top.weights = MatrixR::Zero(1, 1);
  top.bias = VectorR::Zero(1);
  top.activation = ActivationKind::Identity;
  net.layers = {hidden, top};
  return net;
}

}  // namespace

TEST_CASE("cpwl extraction reproduces the network everywhere") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    LayeredNetworkD net = random_relu_net_d(rng, 4, 2);
    PiecewiseLinearFunction f = extract_cpwl(net, -1.0, 1.0);
    for (int i = 0; i <= 3000; ++i) {
      const double t = -1.0 + 2.0 * i / 3000;
      VectorD x(1);
      x(0) = t;
      CHECK(std::abs(f.eval(t) - evaluate(net, x)) < 1e-9);
    }
  }
}

TEST_CASE("piece counts match the dense-sampling oracle") {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 60; ++trial) {
    LayeredNetworkD net = random_relu_net_d(rng, 3 + trial % 4, 1 + trial % 3);
    PiecewiseLinearFunction f = extract_cpwl(net, -1.0, 1.0);
    const int got = count_linear_pieces(f, 1e-6);
    const int want = piece_oracle::count_pieces(
        [&](double t) {
          VectorD x(1);
          x(0) = t;
          return evaluate(net, x);
        },
        -1.0, 1.0);
    CHECK(got == want);
  }
}

TEST_CASE("depth-width piece ceiling holds") {
  std::mt19937 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 7, L = 1 + trial % 3;
    LayeredNetworkD net = random_relu_net_d(rng, n, L);
    PiecewiseLinearFunction f = extract_cpwl(net, -3.0, 3.0);
    long long cap = 1;
    for (int l = 0; l < L; ++l) cap *= 2 * n;
    CHECK(count_linear_pieces(f) <= cap);
  }
}

TEST_CASE("zero network against the product scores about one") {
  NetworkValue net = zero_net(2);
  CertifiedErrorReport rep =
      certify_sup_error(net, {TargetKind::Product, 1}, Box::cube(2, Real(0), Real(1)), Real(0));
  CHECK(rep.certified);
  CHECK(rep.bound >= Real(1));
  CHECK(rep.bound < Real("1.1"));
  CHECK(rep.grid_sup == Real(1));
}

TEST_CASE("univariate relu certification is exact per piece") {
  // |t| = relu(t) + relu(-t) against the monomial t: error is |t| - t,
  // sup 2 on [-1,1]
  LayeredNetwork net;
  net.d = 1;
  LayeredNetwork::Layer hidden;
  hidden.weights = MatrixR(2, 1);
  hidden.weights << Real(1), Real(-1);
  hidden.bias = VectorR::Zero(2);
  hidden.activation = ActivationKind::ReLU;
  LayeredNetwork::Layer top;
  top.weights = MatrixR(1, 2);
  top.weights << Real(1), Real(1);
  top.bias = VectorR::Zero(1);
  top.activation = ActivationKind::Identity;
  net.layers = {hidden, top};
  CertifiedErrorReport rep = certify_sup_error(NetworkValue(net), {TargetKind::Monomial, 1},
                                               Box::cube(1, Real(-1), Real(1)), Real(0));
  CHECK(rep.method == "cpwl_exact");
  CHECK(abs(rep.bound - Real(2)) < Real("1e-12"));
}

TEST_CASE("taylor-cell certification of a synthesized monomial net") {
  MonomialSynthesis ms = synth_monomial_exp(3, Real("1e-3"));
  CertifiedErrorReport rep = certify_sup_error(NetworkValue(ms.net), {TargetKind::Monomial, 3},
                                               Box::cube(1, Real(0), Real(1)), Real(0));
  CHECK(rep.method == "taylor_cells");
  CHECK(rep.certified);
  CHECK(rep.bound < Real("1e-3"));
  CHECK(rep.grid_sup <= rep.bound);
}

TEST_CASE("three point certificate on the zero network") {
  LayeredNetwork net = zero_net(2);
  LowerBoundCertificate cert = three_point_lower_bound(net, 2, Real(3));
  // single piece spanning [2,3]: gap = 9 + 4 - 2(2.5)^2 = 0.5, implied 0.125
  CHECK(abs(cert.gap - Real("0.5")) < Real("1e-12"));
  CHECK(abs(cert.implied_lower_bound - Real("0.125")) < Real("1e-12"));
  CHECK(cert.strong_convexity_m == Real(2));
}

TEST_CASE("certificate soundness on random cpwl approximants") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const unsigned d = 2 + trial % 5;
    const double k = (trial % 2 == 0) ? 2.0 : 3.0;
    const double a = (k + 1) / 2, b = k;
    const int pieces = 1 + int(U(rng) * 6);
    PiecewiseLinearFunction f;
    f.t.resize(pieces + 1);
    f.v.resize(pieces + 1);
    for (int i = 0; i <= pieces; ++i) {
      f.t[i] = a + (b - a) * i / pieces;
      f.v[i] = std::pow(f.t[i], double(d)) + 0.3 * (U(rng) - 0.5);
    }
    LowerBoundCertificate cert = three_point_lower_bound(f, d, Real(k));
    double sup = 0;
    for (int i = 0; i <= 100000; ++i) {
      const double t = a + (b - a) * i / 100000;
      sup = std::max(sup, std::abs(f.eval(t) - std::pow(t, double(d))));
    }
    CHECK(cert.implied_lower_bound.convert_to<double>() <= sup + 1e-12);
  }
}

TEST_CASE("minimum width table entries") {
  CHECK(min_width_lower_bound(2, Real(3), Real("0.01"), 1) == 2);
  CHECK(min_width_lower_bound(10, Real(3), Real("0.1"), 1) == 61);
  CHECK_THROWS_AS(min_width_lower_bound(1, Real(3), Real("0.1"), 1), input_error);
  CHECK_THROWS_AS(min_width_lower_bound(2, Real(1), Real("0.1"), 1), input_error);
}

TEST_CASE("grid certification falls back with a sound lipschitz slack") {
  // small multivariate exp net, benign coefficients: grid path applies
  ShallowExpSum net = ShallowExpSum::zero(2);
  VectorR w(2);
  w << Real("0.1"), Real("0.1");
  net.add_term(Real(1), w);
  CertifiedErrorReport rep = certify_sup_error(NetworkValue(net), {TargetKind::Product, 1},
                                               Box::cube(2, Real(0), Real(1)), Real(0));
  CHECK(rep.method == "grid_lipschitz");
  CHECK(rep.certified);
  CHECK(rep.bound >= rep.grid_sup);
  // dense independent sampling stays under the bound
  std::mt19937 rng(79);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    VectorR x(2);
    x << Real(U(rng)), Real(U(rng));
    CHECK(abs(evaluate(net, x) - x(0) * x(1)) <= rep.bound);
  }
}
