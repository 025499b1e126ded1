#include "mononet/univariate.hpp"

#include <queue>

namespace mononet {

ExpSumFn::ExpSumFn(const ShallowExpSum& net) {
  if (!net.is_univariate()) throw input_error("ExpSumFn requires a univariate network");
  nu_.reserve(net.terms.size());
  w_.reserve(net.terms.size());
  for (const auto& t : net.terms) {
    nu_.push_back(t.nu);
    w_.push_back(t.w(0));
    max_w_ = std::max(max_w_, abs(t.w(0)));
  }
}

ExpSumFn::ExpSumFn(std::vector<Real> nu, std::vector<Real> w)
    : nu_(std::move(nu)), w_(std::move(w)) {
  if (nu_.size() != w_.size()) throw input_error("coefficient/weight count mismatch");
  for (const auto& wi : w_) max_w_ = std::max(max_w_, abs(wi));
}

TaylorModel ExpSumFn::taylor(const Real& c, const Real& rho, int order) const {
  TaylorModel tm;
  tm.coef.assign(static_cast<std::size_t>(order), Real(0));
  for (std::size_t i = 0; i < nu_.size(); ++i) {
    const Real base = nu_[i] * exp(w_[i] * c);
    Real term = base;  // nu w^k e^{wc} / k!
    tm.coef[0] += term;
    for (int k = 1; k < order; ++k) {
      term *= w_[i] / Real(k);
      tm.coef[static_cast<std::size_t>(k)] += term;
    }
    // |f_i^{(order)}| <= |nu| |w|^order e^{w c + |w| rho} on the cell.
    Real rem = abs(nu_[i]) * exp(w_[i] * c + abs(w_[i]) * rho);
    for (int k = 1; k <= order; ++k) rem *= abs(w_[i]) * rho / Real(k);
    tm.remainder += rem;
  }
  return tm;
}

Real ExpSumFn::eval(const Real& t) const {
  Real s(0);
  for (std::size_t i = 0; i < nu_.size(); ++i) s += nu_[i] * exp(w_[i] * t);
  return s;
}

PolyFn::PolyFn(std::vector<Real> coef) : coef_(std::move(coef)) {
  while (coef_.size() > 1 && coef_.back() == 0) coef_.pop_back();
}

std::vector<Real> poly_shift(const std::vector<Real>& coef, const Real& shift) {
  // Repeated synthetic division; exact in the working precision.
  std::vector<Real> a = coef;
  if (a.empty()) return a;
  const std::size_t n = a.size();
  for (std::size_t j = 0; j + 1 < n; ++j)
    for (std::size_t k = n - 1; k > j; --k) a[k - 1] += shift * a[k];
  return a;
}

TaylorModel PolyFn::taylor(const Real& c, const Real&, int) const {
  TaylorModel tm;
  tm.coef = poly_shift(coef_, c);
  return tm;  // exact, no remainder
}

Real poly_eval(const std::vector<Real>& coef, const Real& x) {
  Real r(0);
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) r = r * x + *it;
  return r;
}

std::vector<Real> poly_derivative(const std::vector<Real>& coef) {
  std::vector<Real> d;
  for (std::size_t k = 1; k < coef.size(); ++k) d.push_back(Real(k) * coef[k]);
  return d;
}

Real PolyFn::eval(const Real& t) const { return poly_eval(coef_, t); }

MonomialFn::MonomialFn(unsigned degree) : m_(degree) {}

TaylorModel MonomialFn::taylor(const Real& c, const Real&, int) const {
  TaylorModel tm;
  tm.coef.assign(m_ + 1, Real(0));
  // binomial expansion of (c+u)^m
  Real b(1);
  for (unsigned k = 0; k <= m_; ++k) {
    tm.coef[k] = b * pow(c, static_cast<int>(m_ - k));
    b *= Real(m_ - k);
    b /= Real(k + 1);
  }
  return tm;
}

Real MonomialFn::eval(const Real& t) const { return pow(t, static_cast<int>(m_)); }

TaylorModel LogFn::taylor(const Real& c, const Real& rho, int order) const {
  if (c - rho <= 0) throw range_error("log Taylor cell touches zero");
  TaylorModel tm;
  tm.coef.assign(static_cast<std::size_t>(order), Real(0));
  tm.coef[0] = log(c);
  Real cp(c);
  for (int k = 1; k < order; ++k) {
    tm.coef[static_cast<std::size_t>(k)] = (k % 2 == 1 ? Real(1) : Real(-1)) / (Real(k) * cp);
    cp *= c;
  }
  // |ln^{(K)}(t)| = (K-1)! / t^K <= (K-1)! / (c-rho)^K on the cell.
  Real ratio = rho / (c - rho);
  tm.remainder = pow(ratio, order) / Real(order);
  return tm;
}

Real LogFn::eval(const Real& t) const { return log(t); }

TaylorModel ScaledExpFn::taylor(const Real& c, const Real& rho, int order) const {
  TaylorModel tm;
  tm.coef.assign(static_cast<std::size_t>(order), Real(0));
  Real term = nu_ * exp(c);
  tm.coef[0] = term;
  for (int k = 1; k < order; ++k) {
    term /= Real(k);
    tm.coef[static_cast<std::size_t>(k)] = term;
  }
  Real rem = abs(nu_) * exp(c + rho);
  for (int k = 1; k <= order; ++k) rem *= rho / Real(k);
  tm.remainder = rem;
  return tm;
}

Real ScaledExpFn::eval(const Real& t) const { return nu_ * exp(t); }

namespace {

struct Cell {
  Real lo, hi;
  Real upper;   // enclosure bound on sup |F-G| over the cell
  Real center_abs;
};

Cell make_cell(const UnivariateFn& F, const UnivariateFn& G, const Real& lo, const Real& hi,
               int order) {
  Cell cell{lo, hi, Real(0), Real(0)};
  const Real c = (lo + hi) / 2;
  const Real rho = (hi - lo) / 2;
  TaylorModel tf = F.taylor(c, rho, order);
  TaylorModel tg = G.taylor(c, rho, order);
  const std::size_t n = std::max(tf.coef.size(), tg.coef.size());
  Real u(0), rp(1);
  for (std::size_t k = 0; k < n; ++k) {
    Real dk = (k < tf.coef.size() ? tf.coef[k] : Real(0)) -
              (k < tg.coef.size() ? tg.coef[k] : Real(0));
    if (k == 0) cell.center_abs = abs(dk);
    u += abs(dk) * rp;
    rp *= rho;
  }
  // Inflate by a relative guard so accumulated round-to-nearest error in the
  // enclosure arithmetic cannot nudge the bound below the true sup.
  const Real guard = ldexp(Real(1), 48 - static_cast<int>(precision_bits()));
  cell.upper = (u + tf.remainder + tg.remainder) * (1 + guard);
  return cell;
}

}  // namespace

SupBound certified_sup_diff(const UnivariateFn& F, const UnivariateFn& G, const Real& a,
                            const Real& b, const Real& gap_tol, int order,
                            std::size_t max_cells) {
  if (!(a < b)) throw input_error("certified_sup_diff: empty interval");
  if (!(gap_tol > 0)) throw input_error("certified_sup_diff: gap_tol must be positive");

  auto cmp = [](const Cell& x, const Cell& y) { return x.upper < y.upper; };
  std::priority_queue<Cell, std::vector<Cell>, decltype(cmp)> queue(cmp);

  Real measured(0);
  Real min_width = b - a;
  std::size_t n_cells = 1;

  // Seed with a handful of cells so weights with |w|*rho >> 1 start converging.
  const int seed = 8;
  for (int i = 0; i < seed; ++i) {
    Real lo = a + (b - a) * i / seed;
    Real hi = a + (b - a) * (i + 1) / seed;
    Cell cell = make_cell(F, G, lo, hi, order);
    measured = std::max(measured, cell.center_abs);
    queue.push(std::move(cell));
  }
  n_cells = seed;

  while (true) {
    const Cell top = queue.top();
    if (top.upper <= measured + gap_tol) {
      return SupBound{top.upper, measured, n_cells, min_width};
    }
    if (n_cells >= max_cells)
      throw resource_error("certified_sup_diff: cell budget exhausted (bound gap " +
                           to_decimal_string(top.upper - measured) + ")");
    queue.pop();
    const Real mid = (top.lo + top.hi) / 2;
    for (const auto& [lo, hi] : {std::pair{top.lo, mid}, std::pair{mid, top.hi}}) {
      Cell cell = make_cell(F, G, lo, hi, order);
      measured = std::max(measured, cell.center_abs);
      min_width = std::min(min_width, cell.hi - cell.lo);
      queue.push(std::move(cell));
    }
    ++n_cells;
  }
}

}  // namespace mononet
