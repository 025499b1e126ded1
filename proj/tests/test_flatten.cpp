#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mononet/flatten.hpp"

#include "mononet/univariate.hpp"

#include <random>

using namespace mononet;

namespace {

Real binom_ull(unsigned n, unsigned k) { return binomial_real(n, k); }

// independent count of multi-indices over n slots with |k| <= r
unsigned long long count_multi_indices(unsigned n, unsigned r) {
  std::vector<unsigned long long> ways(r + 1, 0);
  ways[0] = 1;  // zero slots: only the empty index
  for (unsigned slot = 0; slot < n; ++slot) {
    std::vector<unsigned long long> next(r + 1, 0);
    for (unsigned total = 0; total <= r; ++total)
      for (unsigned take = 0; take + total <= r; ++take) next[total + take] += ways[total];
    ways = std::move(next);
  }
  unsigned long long sum = 0;
  for (auto w : ways) sum += w;
  return sum;
}

}  // namespace

TEST_CASE("exp poly approximation certifies on the requested interval") {
  ExpPolyApprox ap = approx_exp_poly(Real(-1), Real("0.1"), Real("0.01"));
  CHECK(ap.bound < Real("0.01"));
  PolyFn p(ap.poly.a);
  for (int i = 0; i <= 2000; ++i) {
    const Real t = Real(-1) + Real("1.1") * i / 2000;
    CHECK(abs(p.eval(t) - exp(t)) <= ap.bound);
  }
  // degenerate interval: a single exact sample
  ExpPolyApprox point = approx_exp_poly(Real("0.3"), Real("0.3"), Real("0.01"));
  CHECK(point.poly.a.size() == 1);
  CHECK(abs(point.poly.a[0] - exp(Real("0.3"))) < Real("1e-70"));
}

TEST_CASE("power of an exponential flattens exactly") {
  // exp(w.x)^m = exp(m w.x): single-term composition must be that one term
  ShallowExpSum f = ShallowExpSum::zero(2);
  VectorR w(2);
  w << Real("0.25"), Real("-0.125");
  f.add_term(Real(1), w);
  PolynomialCoeffs p = PolynomialCoeffs::from({Real(0), Real(0), Real(0), Real(1)});  // t^3
  CompositionResult comp = compose_poly_with_shallow(p, f, {}, Box::cube(2, Real(0), Real(1)));
  REQUIRE(comp.net.terms.size() == 1);
  CHECK(comp.net.terms[0].nu == Real(1));
  CHECK(comp.net.terms[0].w(0) == Real("0.75"));
  CHECK(comp.net.terms[0].w(1) == Real("-0.375"));
}

TEST_CASE("composition agrees with direct polynomial-of-network evaluation") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Box box = Box::cube(2, Real(0), Real(1));
  for (unsigned n = 1; n <= 3; ++n) {
    for (unsigned r = 1; r <= 4; ++r) {
      ShallowExpSum f = ShallowExpSum::zero(2);
      for (unsigned i = 0; i < n; ++i) {
        VectorR w(2);
        w << Real(U(rng)), Real(U(rng));
        f.add_term(Real(U(rng)), w);
      }
      std::vector<Real> a(r + 1);
      for (auto& c : a) c = Real(U(rng));
      if (a[r] == 0) a[r] = 1;
      PolynomialCoeffs p = PolynomialCoeffs::from(a);
      CompositionResult comp = compose_poly_with_shallow(p, f, {}, box);
      CHECK(comp.pre_merge_count == binom_ull(n + r, r));
      CHECK(comp.pre_merge_count == Real(count_multi_indices(n, r)));
      for (int pt = 0; pt < 100; ++pt) {
        VectorR x(2);
        x << Real(std::abs(U(rng))), Real(std::abs(U(rng)));
        const Real direct = poly_eval(p.a, evaluate(f, x));
        const Real flat = evaluate(comp.net, x);
        const Real scale = std::max(Real(1), abs(direct));
        CHECK(abs(flat - direct) / scale < Real("1e-9"));
      }
    }
  }
}

TEST_CASE("composition refuses blown term budgets") {
  ShallowExpSum f = ShallowExpSum::zero(1);
  for (int i = 0; i < 40; ++i) {
    VectorR w(1);
    w(0) = Real(i) / 40;
    f.add_term(Real(1), w);
  }
  std::vector<Real> a(21, Real(1));
  FlattenBudget tiny;
  tiny.max_terms = 1000;
  CHECK_THROWS_AS(
      compose_poly_with_shallow(PolynomialCoeffs::from(a), f, tiny, Box::cube(1, Real(0), Real(1))),
      resource_error);
}

TEST_CASE("pruning accounts for the dropped mass") {
  ShallowExpSum f = ShallowExpSum::zero(1);
  VectorR w(1);
  w(0) = Real("0.5");
  f.add_term(Real(1), w);
  w(0) = Real("-40");
  f.add_term(Real("1e-25"), w);  // negligible on [0,1]
  PolynomialCoeffs p = PolynomialCoeffs::from({Real(0), Real(1)});
  FlattenBudget budget;
  budget.prune_threshold = Real("1e-20");
  Box box = Box::cube(1, Real(0), Real(1));
  CompositionResult comp = compose_poly_with_shallow(p, f, budget, box);
  CHECK(comp.net.terms.size() == 1);
  CHECK(comp.pruned_mass > Real(0));
  CHECK(comp.pruned_mass < Real("1e-20"));
  for (int i = 0; i <= 200; ++i) {
    const Real t = Real(i) / 200;
    VectorR x(1);
    x(0) = t;
    CHECK(abs(evaluate(comp.net, x) - evaluate(f, x)) <= comp.pruned_mass + Real("1e-60"));
  }
}

TEST_CASE("two-layer flattening is certified against the layered network") {
  ProductTwoLayerSynthesis tl = synth_product_two_layer(2, Real(1), Real("0.2"));
  Box box = Box::cube(2, tl.delta, Real(1));
  FlattenResult fl = flatten_two_layer(tl.net, box, Real("0.1"), {});
  CHECK(fl.report.bound < Real("0.1"));
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> U(tl.delta.convert_to<double>(), 1.0);
  for (int i = 0; i < 200; ++i) {
    VectorR x(2);
    x << Real(U(rng)), Real(U(rng));
    CHECK(abs(evaluate(fl.net, x) - evaluate(tl.net, x)) <= fl.report.bound);
  }
}

TEST_CASE("univariate relu conversion: monotone knots, sound exact bound") {
  for (const char* nu : {"2.5", "-1.5"}) {
    ReluUnivariate ru = exp_to_relu_univariate(Real(nu), Real(-1), Real(1), Real("0.01"));
    CHECK(ru.neurons >= 1);
    // knot positions (negated biases) strictly increase
    const VectorR& bias = ru.net.layers[0].bias;
    for (Eigen::Index j = 1; j < bias.size(); ++j) CHECK(-bias(j) > -bias(j - 1));
    Real worst = 0;
    for (int i = 0; i <= 20000; ++i) {
      const Real t = Real(-1) + Real(2) * i / 20000;
      VectorR x(1);
      x(0) = t;
      worst = std::max(worst, abs(evaluate(ru.net, x) - Real(nu) * exp(t)));
    }
    CHECK(worst <= ru.bound);
    CHECK(ru.bound <= Real("0.01"));
  }
  ReluUnivariate zero = exp_to_relu_univariate(Real(0), Real(-1), Real(1), Real("0.01"));
  VectorR x(1);
  x(0) = Real("0.37");
  CHECK(evaluate(zero.net, x) == Real(0));
}

TEST_CASE("shallow relu conversion certifies the requested budget") {
  ShallowExpSum f = ShallowExpSum::zero(2);
  VectorR w(2);
  w << Real("0.4"), Real("-0.3");
  f.add_term(Real("1.5"), w);
  w << Real("-0.2"), Real("0.6");
  f.add_term(Real(-2), w);
  f.add_term(Real("0.7"), VectorR::Zero(2));  // constant folds exactly
  Box box = Box::cube(2, Real(0), Real(1));
  ReluConversion rc = exp_to_relu_shallow(f, box, Real("0.05"), {});
  CHECK(rc.bound < Real("0.05"));
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    VectorR x(2);
    x << Real(U(rng)), Real(U(rng));
    CHECK(abs(evaluate(rc.net, x) - evaluate(f, x)) <= rc.bound + Real("1e-50"));
  }
}

TEST_CASE("relu conversion vetoes hopeless neuron counts") {
  ShallowExpSum f = ShallowExpSum::zero(1);
  VectorR w(1);
  w(0) = Real(30);
  f.add_term(Real(1), w);
  FlattenBudget tiny;
  tiny.max_neurons = 100;
  CHECK_THROWS_AS(exp_to_relu_shallow(f, Box::cube(1, Real(0), Real(1)), Real("1e-6"), tiny),
                  synthesis_error);
}

TEST_CASE("full pipeline stages sum and certify") {
  ProductReluSynthesis pr = synth_product_shallow_relu(2, Real(1), Real("0.5"), {});
  CHECK(pr.bound < Real("0.5"));
  CHECK(pr.bound ==
        pr.two_layer.report.bound + pr.flat.report.bound + pr.relu.report.bound);
  REQUIRE(pr.stages.size() == 4);
  CHECK(pr.stages[3].method == "measured_only");
  // certified region spot check
  std::mt19937 rng(53);
  std::uniform_real_distribution<double> U(pr.delta.convert_to<double>(), 1.0);
  LayeredNetworkD nd = to_double(pr.relu.net);
  for (int i = 0; i < 500; ++i) {
    VectorD x(2);
    x << U(rng), U(rng);
    CHECK(std::abs(evaluate(nd, x) - x(0) * x(1)) <= pr.bound.convert_to<double>() + 1e-9);
  }
}
