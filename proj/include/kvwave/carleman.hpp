#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kvwave/common.hpp"

namespace kvwave::carleman {

using Point = Eigen::Vector2d;  ///< second component is 0 in 1D

/// Value, gradient and Hessian of a scalar field at a point.
struct Jet {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
};

using Field = std::function<Jet(const Point&)>;

/// Two-sided geometry in the radial variable r (r = x in 1D, r = |x| in 2D):
/// side 1 is r_in < r < r0, side 2 is r0 < r < R, the interface is r = r0 and
/// the outer boundary is r = R. Normals point out of side 2.
struct Geometry {
  int dim = 2;
  double r_in = 0.25;
  double r0 = 0.5;
  double R = 1.0;
};

/// Weights phi_k = exp(lambda psi_k) on side k.
struct WeightSpec {
  std::string name;
  Geometry geometry;
  Field psi1;
  Field psi2;
  double lambda = 1.0;
  cplx alpha{0.0, 1.0};  ///< parameter of the omitted lower-order term tau^2 / (1 + alpha tau)
  double tau_min = 0.05;

  /// phi_k with gradient lambda phi grad psi and Hessian
  /// lambda phi (lambda grad psi grad psi^T + Hess psi).
  [[nodiscard]] Jet phi(int side, const Point& x) const;
};

/// psi = offset + slope (r0 - r).
Field linear_radial_field(int dim, double offset, double slope, double r0);
/// psi = offset + curvature |x - center|^2.
Field quadratic_field(int dim, double offset, double curvature, const Point& center);

/// p_k = |xi|^2 + 2 i tau xi . grad phi_k - tau^2 |grad phi_k|^2, with an
/// extra -tau^2 on side 2. Throws InvalidArgument outside the closed side.
cplx eval_symbol(const WeightSpec& w, const Point& x, const Point& xi, double tau, int side);

/// {Re p, Im p} = 4 tau (xi^T H xi + tau^2 grad phi^T H grad phi), H = Hess phi_k.
double poisson_bracket(const WeightSpec& w, const Point& x, const Point& xi, double tau, int side);

struct Sampling {
  int radial = 33;       ///< points per side along r, endpoints included
  int angular = 32;      ///< 2D only
  int tau_levels = 24;   ///< tau in [tau_min, 1)
  int directions = 32;   ///< xi directions per tau (2D)
  double eps_zero = 1e-2;
  double c_min = 1e-3;
  double trace_tol = 1e-12;
};

struct SymbolSample {
  Point x = Point::Zero();
  Point xi = Point::Zero();
  double tau = 0.0;
  int side = 1;
  cplx p_value;
  double bracket = 0.0;
};

struct ConditionRecord {
  std::string id;  ///< GRAD, OUTER_SIGN, INTERFACE_SIGN, JUMP, SUBELL
  double margin = 0.0;
  Point where = Point::Zero();
  int side = 0;
  bool pass = false;
  bool vacuous = false;  ///< no sample fell in the condition's set
  std::size_t samples = 0;
};

struct WeightReport {
  std::string weight;
  int dim = 2;
  std::vector<ConditionRecord> conditions;
  bool pass = false;
  std::vector<SymbolSample> near_zeros;
  double trace_gap = 0.0;         ///< max |phi1 - phi2| at interface samples
  double alpha_term_max = 0.0;    ///< max |tau^2 / (1 + alpha tau)| over side-1 near-zeros

  [[nodiscard]] const ConditionRecord& condition(const std::string& id) const;
};

/// Evaluates the five hypotheses on the sample sets of `w.geometry`. A trace
/// mismatch above `sampling.trace_tol` raises InvalidArgument.
WeightReport check_weight_conditions(const WeightSpec& w, const Sampling& sampling = {});

/// Shipped weights that satisfy every hypothesis.
std::vector<WeightSpec> weight_catalog();
/// Looks up catalog and test weights: radial-linear, radial-linear-mild,
/// linear-normal, jump-violating, quadratic-critical.
WeightSpec named_weight(const std::string& name, double lambda = 0.0);

/// Same psi with a different convexification parameter.
WeightSpec with_lambda(WeightSpec w, double lambda);

/// CSV `x,xi,tau,side,abs_p,bracket`; 2D vectors are written space-separated.
void write_subell_csv(std::ostream& os, const WeightReport& report);

}  // namespace kvwave::carleman
