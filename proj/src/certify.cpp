#include "mononet/certify.hpp"

#include <algorithm>
#include <cmath>

namespace mononet {

Real target_eval(const TargetSpec& target, const VectorR& x) {
  switch (target.kind) {
    case TargetKind::Product: {
      Real p(1);
      for (Eigen::Index i = 0; i < x.size(); ++i) p *= x(i);
      return p;
    }
    case TargetKind::Monomial:
      if (x.size() != 1) throw input_error("monomial target is univariate");
      return pow(x(0), static_cast<int>(target.degree));
    case TargetKind::Log:
      if (x.size() != 1) throw input_error("log target is univariate");
      return log(x(0));
    case TargetKind::Exp:
      if (x.size() != 1) throw input_error("exp target is univariate");
      return exp(x(0));
  }
  throw input_error("unknown target");
}

Real target_lipschitz(const TargetSpec& target, const Box& box) {
  switch (target.kind) {
    case TargetKind::Product: {
      // ||grad||_2 <= sqrt(sum_j prod_{i!=j} max(|lo_i|,|hi_i|)^2)
      Real s(0);
      for (Eigen::Index j = 0; j < box.dim(); ++j) {
        Real p(1);
        for (Eigen::Index i = 0; i < box.dim(); ++i)
          if (i != j) p *= std::max(abs(box.lo(i)), abs(box.hi(i)));
        s += p * p;
      }
      return sqrt(s);
    }
    case TargetKind::Monomial: {
      Real m = std::max(abs(box.lo(0)), abs(box.hi(0)));
      if (target.degree == 0) return Real(0);
      return Real(target.degree) * pow(m, static_cast<int>(target.degree - 1));
    }
    case TargetKind::Log:
      if (box.lo(0) <= 0) throw input_error("log target needs a positive box");
      return 1 / box.lo(0);
    case TargetKind::Exp:
      return exp(box.hi(0));
  }
  throw input_error("unknown target");
}

std::unique_ptr<UnivariateFn> target_univariate(const TargetSpec& target) {
  switch (target.kind) {
    case TargetKind::Product:
      return std::make_unique<MonomialFn>(1);  // product of one variable
    case TargetKind::Monomial:
      return std::make_unique<MonomialFn>(target.degree);
    case TargetKind::Log:
      return std::make_unique<LogFn>();
    case TargetKind::Exp:
      return std::make_unique<ScaledExpFn>(Real(1));
  }
  throw input_error("unknown target");
}

double PiecewiseLinearFunction::eval(double x) const {
  if (t.size() < 2) throw input_error("piecewise linear function needs two breakpoints");
  if (x <= t.front()) return v.front();
  if (x >= t.back()) return v.back();
  auto it = std::upper_bound(t.begin(), t.end(), x);
  std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  double w = (x - t[i]) / (t[i + 1] - t[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

std::vector<double> PiecewiseLinearFunction::slopes() const {
  std::vector<double> s(segment_count());
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s[i] = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
  return s;
}

PiecewiseLinearFunction extract_cpwl(const LayeredNetworkD& net, double a, double b) {
  if (net.d != 1) throw input_error("extract_cpwl requires a 1-dimensional input");
  if (!(a < b)) throw input_error("extract_cpwl: empty interval");
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i)
    if (net.layers[i].activation != ActivationKind::ReLU)
      throw input_error("extract_cpwl requires ReLU hidden activations");

  std::vector<double> T{a, b};
  // values: neurons x breakpoints (rows are the identity signal initially)
  MatrixD V(1, 2);
  V << a, b;

  const double dedupe = 1e-14 * (b - a);

  for (const auto& l : net.layers) {
    MatrixD P = l.weights * V;
    P.colwise() += l.bias;
    if (l.activation == ActivationKind::ReLU) {
      std::vector<double> crossings;
      for (Eigen::Index r = 0; r < P.rows(); ++r) {
        for (std::size_t i = 0; i + 1 < T.size(); ++i) {
          double p0 = P(r, static_cast<Eigen::Index>(i));
          double p1 = P(r, static_cast<Eigen::Index>(i + 1));
          if ((p0 < 0 && p1 > 0) || (p0 > 0 && p1 < 0)) {
            double tc = T[i] + (T[i + 1] - T[i]) * (p0 / (p0 - p1));
            crossings.push_back(tc);
          }
        }
      }
      if (!crossings.empty()) {
        std::vector<double> newT = T;
        newT.insert(newT.end(), crossings.begin(), crossings.end());
        std::sort(newT.begin(), newT.end());
        std::vector<double> merged;
        for (double x : newT)
          if (merged.empty() || x - merged.back() > dedupe) merged.push_back(x);
        // re-sample pre-activations on the refined breakpoints (linear within
        // old pieces, so interpolation is exact)
        MatrixD P2(P.rows(), static_cast<Eigen::Index>(merged.size()));
        std::size_t seg = 0;
        for (std::size_t j = 0; j < merged.size(); ++j) {
          while (seg + 2 < T.size() && merged[j] > T[seg + 1]) ++seg;
          double w = (merged[j] - T[seg]) / (T[seg + 1] - T[seg]);
          for (Eigen::Index r = 0; r < P.rows(); ++r)
            P2(r, static_cast<Eigen::Index>(j)) =
                P(r, static_cast<Eigen::Index>(seg)) +
                w * (P(r, static_cast<Eigen::Index>(seg + 1)) - P(r, static_cast<Eigen::Index>(seg)));
          }
        T = std::move(merged);
        P = std::move(P2);
      }
      V = P.cwiseMax(0.0);
    } else {  // identity output
      V = std::move(P);
    }
  }

  PiecewiseLinearFunction f;
  f.t = std::move(T);
  f.v.resize(f.t.size());
  for (std::size_t i = 0; i < f.t.size(); ++i) f.v[i] = V(0, static_cast<Eigen::Index>(i));
  return f;
}

PiecewiseLinearFunction extract_cpwl(const LayeredNetwork& net, double a, double b) {
  return extract_cpwl(to_double(net), a, b);
}

int count_linear_pieces(const PiecewiseLinearFunction& f, double slope_tol) {
  auto s = f.slopes();
  if (s.empty()) return 0;
  int count = 1;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (std::abs(s[i] - s[i - 1]) > slope_tol) ++count;
  return count;
}

namespace {

// Max |target - chord| on a single linear piece: endpoints plus the interior
// point where the target's derivative matches the chord slope. Valid for the
// named targets because their second derivative has one sign per side of 0.
Real piece_sup_error(const TargetSpec& target, const Real& t0, const Real& t1, const Real& v0,
                     const Real& v1) {
  const Real slope = (v1 - v0) / (t1 - t0);
  auto chord = [&](const Real& t) { return v0 + slope * (t - t0); };
  std::vector<Real> candidates{t0, t1};

  auto add_if_inside = [&](const Real& t) {
    if (t > t0 && t < t1) candidates.push_back(t);
  };

  switch (target.kind) {
    case TargetKind::Product:
    case TargetKind::Monomial: {
      unsigned m = target.kind == TargetKind::Product ? 1 : target.degree;
      if (m >= 2) {
        const Real r = slope / Real(m);
        const unsigned e = m - 1;  // solve t^e = r
        if (e % 2 == 1) {
          add_if_inside(r >= 0 ? pow(r, Real(1) / e) : -pow(-r, Real(1) / e));
        } else if (r > 0) {
          Real root = pow(r, Real(1) / e);
          add_if_inside(root);
          add_if_inside(-root);
        } else if (r == 0) {
          add_if_inside(Real(0));
        }
        if (t0 < 0 && t1 > 0) add_if_inside(Real(0));
      }
      break;
    }
    case TargetKind::Exp:
      if (slope > 0) add_if_inside(log(slope));
      break;
    case TargetKind::Log:
      if (slope > 0) add_if_inside(1 / slope);
      break;
  }

  Real best(0);
  for (const auto& t : candidates) {
    VectorR x(1);
    x(0) = t;
    best = std::max(best, abs(target_eval(target, x) - chord(t)));
  }
  return best;
}

struct LatticeSpec {
  std::vector<Eigen::Index> counts;
  Real max_spacing;
};

LatticeSpec lattice_for(const Box& box, const Real& spacing) {
  LatticeSpec spec;
  spec.max_spacing = 0;
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    Real w = box.width(i);
    Eigen::Index m = 2;
    if (w > 0 && spacing > 0) {
      Real cells = ceil(w / spacing);
      if (cells > Real(1e9)) throw resource_error("grid would need > 1e9 points per dimension");
      m = std::max<Eigen::Index>(2, cells.convert_to<Eigen::Index>() + 1);
    }
    spec.counts.push_back(m);
    if (w > 0) spec.max_spacing = std::max(spec.max_spacing, w / (m - 1));
  }
  return spec;
}

template <class Fn>
void for_each_lattice_point(const Box& box, const std::vector<Eigen::Index>& counts, Fn&& fn) {
  const Eigen::Index d = box.dim();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d), 0);
  VectorR x(d);
  auto coord = [&](Eigen::Index i) {
    if (counts[static_cast<std::size_t>(i)] == 1) return box.lo(i);
    return box.lo(i) +
           box.width(i) * idx[static_cast<std::size_t>(i)] / (counts[static_cast<std::size_t>(i)] - 1);
  };
  for (Eigen::Index i = 0; i < d; ++i) x(i) = coord(i);
  while (true) {
    fn(x);
    Eigen::Index i = 0;
    for (; i < d; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < counts[static_cast<std::size_t>(i)]) {
        x(i) = coord(i);
        break;
      }
      idx[static_cast<std::size_t>(i)] = 0;
      x(i) = coord(i);
    }
    if (i == d) break;
  }
}

}  // namespace

Real measured_sup_on_lattice(const NetworkValue& net, const TargetSpec& target, const Box& box,
                             Eigen::Index points_per_dim, bool double_precision) {
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(box.dim()), points_per_dim);
  Real sup(0);
  if (double_precision) {
    const auto* layered = std::get_if<LayeredNetwork>(&net);
    LayeredNetworkD netd;
    if (layered) netd = to_double(*layered);
    for_each_lattice_point(box, counts, [&](const VectorR& x) {
      VectorD xd = x.unaryExpr([](const Real& r) { return r.convert_to<double>(); });
      double y = layered ? evaluate(netd, xd) : evaluate_double(std::get<ShallowExpSum>(net), xd);
      Real err = abs(Real(y) - target_eval(target, x));
      sup = std::max(sup, err);
    });
  } else {
    for_each_lattice_point(box, counts, [&](const VectorR& x) {
      Real y = std::visit([&](const auto& n) { return evaluate(n, x); }, net);
      sup = std::max(sup, abs(y - target_eval(target, x)));
    });
  }
  return sup;
}

CertifiedErrorReport certify_sup_error(const NetworkValue& net, const TargetSpec& target,
                                       const Box& box, const Real& margin,
                                       std::size_t grid_cap) {
  if (margin < 0) throw input_error("certainty margin cannot be negative");
  const Eigen::Index d = box.dim();
  CertifiedErrorReport rep;
  rep.box = box;

  // Univariate shallow exp network: Taylor-cell enclosures keep the
  // cancellation between coefficients, which the additive Lipschitz constant
  // cannot.
  if (d == 1) {
    if (const auto* shallow = std::get_if<ShallowExpSum>(&net)) {
      if (shallow->d != 1) throw input_error("box dimension mismatch");
      ExpSumFn f(*shallow);
      auto g = target_univariate(target);
      const Real gap = margin > 0 ? margin : Real("1e-6");
      SupBound sb = certified_sup_diff(f, *g, box.lo(0), box.hi(0), gap);
      rep.grid_spacing = sb.min_cell_width;
      rep.grid_sup = sb.measured;
      rep.bound = sb.bound;
      rep.slack = sb.bound - sb.measured;
      rep.method = "taylor_cells";
      return rep;
    }
    const auto& layered = std::get<LayeredNetwork>(net);
    if (layered.layers.front().activation == ActivationKind::ReLU) {
      PiecewiseLinearFunction f =
          extract_cpwl(layered, box.lo(0).convert_to<double>(), box.hi(0).convert_to<double>());
      Real bound(0), meas(0);
      for (std::size_t i = 0; i + 1 < f.t.size(); ++i) {
        Real t0(f.t[i]), t1(f.t[i + 1]), v0(f.v[i]), v1(f.v[i + 1]);
        if (!(t0 < t1)) continue;
        bound = std::max(bound, piece_sup_error(target, t0, t1, v0, v1));
        VectorR x(1);
        x(0) = (t0 + t1) / 2;
        meas = std::max(meas, abs(target_eval(target, x) - Real((v0 + v1) / 2.0)));
      }
      rep.grid_spacing = 0;
      rep.grid_sup = meas;
      rep.bound = bound;
      rep.slack = bound - meas;
      rep.method = "cpwl_exact";
      return rep;
    }
  }

  // Generic path: corner-anchored lattice plus Lipschitz slack.
  Real lam_net = std::visit([&](const auto& n) { return lipschitz_upper_bound(n, box); }, net);
  Real lam = lam_net + target_lipschitz(target, box);
  Real sqrt_d = sqrt(Real(d));
  Real spacing;
  if (margin > 0) {
    spacing = lam > 0 ? 2 * margin / (lam * sqrt_d) : Real(0);
  } else {
    // no margin requested: spend the whole grid budget instead
    const double budget = static_cast<double>(std::min<std::size_t>(grid_cap, 250000));
    const double per_dim = std::max(2.0, std::floor(std::pow(budget, 1.0 / double(d))));
    Real max_w = 0;
    for (Eigen::Index i = 0; i < d; ++i) max_w = std::max(max_w, box.width(i));
    spacing = max_w / Real(per_dim - 1);
  }
  LatticeSpec spec = lattice_for(box, spacing);
  Real total(1);
  for (auto m : spec.counts) total *= Real(m);
  if (total > Real(static_cast<double>(grid_cap)))
    throw resource_error("certification grid needs " + to_decimal_string(total) +
                         " points (cap " + std::to_string(grid_cap) +
                         "); increase the margin or certify structurally");

  Real sup(0);
  const auto* layered = std::get_if<LayeredNetwork>(&net);
  const bool pure_relu =
      layered && std::none_of(layered->layers.begin(), layered->layers.end(),
                              [](const auto& l) { return l.activation == ActivationKind::Exp; });
  if (pure_relu) {
    // piecewise-linear nets can be sampled in double; a rounding allowance
    // well above the accumulated double error is folded into the slack below
    LayeredNetworkD netd = to_double(*layered);
    for_each_lattice_point(box, spec.counts, [&](const VectorR& x) {
      VectorD xd = x.unaryExpr([](const Real& r) { return r.convert_to<double>(); });
      sup = std::max(sup, abs(Real(evaluate(netd, xd)) - target_eval(target, x)));
    });
  } else {
    for_each_lattice_point(box, spec.counts, [&](const VectorR& x) {
      Real y = std::visit([&](const auto& n) { return evaluate(n, x); }, net);
      sup = std::max(sup, abs(y - target_eval(target, x)));
    });
  }
  rep.grid_spacing = spec.max_spacing;
  rep.grid_sup = sup;
  rep.slack = lam * spec.max_spacing * sqrt_d / 2;
  if (pure_relu) rep.slack += sup * Real("1e-12") + Real("1e-9");
  rep.bound = sup + rep.slack;
  rep.method = "grid_lipschitz";
  if (margin <= 0 && rep.slack > rep.grid_sup) {
    // best-effort grid whose Lipschitz slack dwarfs the measured values
    // certifies nothing useful at this resolution; say so
    rep.method = "measured_only";
    rep.certified = false;
  }
  return rep;
}

namespace {

LowerBoundCertificate certificate_from_pieces(const std::vector<double>& t,
                                              const std::vector<double>& slopes, unsigned d,
                                              const Real& k) {
  // longest merged piece, leftmost on ties
  double best_lo = t.front(), best_hi = t.back();
  if (!slopes.empty()) {
    double lo = t[0];
    double best_len = -1;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
      bool boundary = (i + 1 == slopes.size()) || std::abs(slopes[i + 1] - slopes[i]) > 1e-12;
      if (boundary) {
        double hi = t[i + 1];
        if (hi - lo > best_len) {
          best_len = hi - lo;
          best_lo = lo;
          best_hi = hi;
        }
        lo = hi;
      }
    }
  }

  LowerBoundCertificate cert;
  cert.a = Real(best_lo);
  cert.b = Real(best_hi);
  const Real mid = (cert.a + cert.b) / 2;
  const int dd = static_cast<int>(d);
  cert.gap = pow(cert.b, dd) + pow(cert.a, dd) - 2 * pow(mid, dd);
  cert.implied_lower_bound = cert.gap / 4;
  cert.strong_convexity_m =
      d >= 2 ? Real(d) * Real(d - 1) * pow((k + 1) / 2, static_cast<int>(d) - 2) : Real(0);
  cert.structural_floor = cert.strong_convexity_m * (cert.b - cert.a) * (cert.b - cert.a) / 16;
  return cert;
}

}  // namespace

LowerBoundCertificate three_point_lower_bound(const PiecewiseLinearFunction& f, unsigned d,
                                              const Real& k) {
  if (!(k > 1)) throw input_error("three-point certificate requires k > 1");
  return certificate_from_pieces(f.t, f.slopes(), d, k);
}

LowerBoundCertificate three_point_lower_bound(const LayeredNetwork& net, unsigned d,
                                              const Real& k) {
  if (!(k > 1)) throw input_error("three-point certificate requires k > 1");
  VectorR ones = VectorR::Constant(net.d, Real(1));
  LayeredNetwork diag = restrict_diagonal(net, ones);
  const double a = ((k + 1) / 2).convert_to<double>();
  const double b = k.convert_to<double>();
  PiecewiseLinearFunction f = extract_cpwl(diag, a, b);
  return three_point_lower_bound(f, d, k);
}

long long min_width_lower_bound(unsigned d, const Real& k, const Real& eps, unsigned L) {
  if (d < 2) throw input_error("min_width_lower_bound requires d >= 2 (no convexity at d < 2)");
  if (!(k > 1)) throw input_error("min_width_lower_bound requires k > 1");
  if (!(eps > 0)) throw input_error("eps must be positive");
  if (L < 1) throw input_error("L must be >= 1");
  // x = ((d(d-1)(k-1)^2 ((k+1)/2)^(d-2)) / (64 eps))^(1/(2L)) / 2, via logs so
  // large d cannot overflow; an approximating net must have n > x strictly.
  Real log_inner = log(Real(d)) + log(Real(d - 1)) + 2 * log(k - 1) +
                   Real(static_cast<int>(d) - 2) * log((k + 1) / 2) - log(Real(64)) - log(eps);
  Real x = exp(log_inner / (2 * static_cast<int>(L))) / 2;
  // The inequality is strict, so an exact-integer x still needs x+1; snap
  // values within the accumulated rounding slop of an integer onto it so the
  // boundary case is decided as in exact arithmetic.
  Real nearest = floor(x + Real(1) / 2);
  if (nearest >= 1 && abs(x - nearest) <= abs(x) * Real("1e-60"))
    return nearest.convert_to<long long>() + 1;
  Real fl = floor(x);
  return fl.convert_to<long long>() + 1;
}

}  // namespace mononet
