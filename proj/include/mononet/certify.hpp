#pragma once

#include "mononet/network.hpp"
#include "mononet/serialize.hpp"
#include "mononet/univariate.hpp"

#include <string>

namespace mononet {

// Named targets the certifier knows closed-form Lipschitz bounds and Taylor
// data for.
enum class TargetKind { Product, Monomial, Log, Exp };

struct TargetSpec {
  TargetKind kind = TargetKind::Product;
  unsigned degree = 1;  // only for Monomial
};

Real target_eval(const TargetSpec& target, const VectorR& x);
Real target_lipschitz(const TargetSpec& target, const Box& box);
std::unique_ptr<UnivariateFn> target_univariate(const TargetSpec& target);

struct CertifiedErrorReport {
  Box box;
  Real grid_spacing{0};
  Real grid_sup{0};  // measured sup on the sample set
  Real slack{0};     // bound - grid_sup, always >= 0
  Real bound{0};     // rigorous upper bound on the uniform error
  bool certified = true;
  std::string method;  // taylor_cells | cpwl_exact | grid_lipschitz | structural | measured_only
  std::string stage;
  std::string notes;
};

// Exact continuous piecewise-linear representation, breakpoints include the
// domain endpoints.
struct PiecewiseLinearFunction {
  std::vector<double> t;
  std::vector<double> v;

  double eval(double x) const;
  std::size_t segment_count() const { return t.size() - 1; }
  std::vector<double> slopes() const;
};

// Exact CPWL extraction of a univariate ReLU network by breakpoint
// propagation: every neuron's zero crossings inside current pieces become new
// breakpoints.
PiecewiseLinearFunction extract_cpwl(const LayeredNetworkD& net, double a, double b);
PiecewiseLinearFunction extract_cpwl(const LayeredNetwork& net, double a, double b);

// Merges adjacent pieces with equal slopes (absolute tolerance) and counts.
int count_linear_pieces(const PiecewiseLinearFunction& f, double slope_tol = 1e-12);

CertifiedErrorReport certify_sup_error(const NetworkValue& net, const TargetSpec& target,
                                       const Box& box, const Real& margin,
                                       std::size_t grid_cap = 4000000);

// Measured-only sup of |net - target| on a corner-anchored lattice.
Real measured_sup_on_lattice(const NetworkValue& net, const TargetSpec& target, const Box& box,
                             Eigen::Index points_per_dim, bool double_precision = false);

struct LowerBoundCertificate {
  Real a, b;                // longest linear piece inside [(k+1)/2, k]
  Real gap;                 // G = p(b) + p(a) - 2 p((a+b)/2), p(t) = t^d
  Real strong_convexity_m;  // d(d-1)((k+1)/2)^(d-2)
  Real implied_lower_bound; // G / 4
  Real structural_floor;    // m (b-a)^2 / 16
};

LowerBoundCertificate three_point_lower_bound(const LayeredNetwork& net, unsigned d,
                                              const Real& k);
LowerBoundCertificate three_point_lower_bound(const PiecewiseLinearFunction& f, unsigned d,
                                              const Real& k);

// Least width n for which the linear-piece inequality fails to rule the
// network out, i.e. the smallest integer strictly above
//   ((d(d-1)(k-1)^2 ((k+1)/2)^(d-2)) / (64 eps))^(1/(2L)) / 2.
long long min_width_lower_bound(unsigned d, const Real& k, const Real& eps, unsigned L);

}  // namespace mononet
