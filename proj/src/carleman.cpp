#include "kvwave/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "kvwave/io.hpp"

namespace kvwave::carleman {

namespace {

constexpr double kDomainTol = 1e-12;

double radius(int dim, const Point& x) { return dim == 1 ? x[0] : x.norm(); }

void check_side(const WeightSpec& w, const Point& x, int side) {
  require(side == 1 || side == 2, "carleman: side must be 1 or 2");
  const Geometry& g = w.geometry;
  require(g.dim == 2 || x[1] == 0.0, "carleman: 1D points must have a zero second component");
  const double r = radius(g.dim, x);
  const double lo = side == 1 ? g.r_in : g.r0;
  const double hi = side == 1 ? g.r0 : g.R;
  if (r < lo - kDomainTol || r > hi + kDomainTol)
    throw InvalidArgument("carleman: point at r = " + fmt17(r) + " lies outside side " + std::to_string(side));
}

Point at(const Geometry& g, double r, double angle) {
  return g.dim == 1 ? Point(r, 0.0) : Point(r * std::cos(angle), r * std::sin(angle));
}

Point radial_unit(const Geometry& g, double angle) {
  return g.dim == 1 ? Point(1.0, 0.0) : Point(std::cos(angle), std::sin(angle));
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return out;
}

std::vector<double> angles(const Geometry& g, int n) {
  if (g.dim == 1) return {0.0};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 2.0 * std::numbers::pi * i / n;
  return out;
}

ConditionRecord make_record(const std::string& id) {
  ConditionRecord r;
  r.id = id;
  r.margin = std::numeric_limits<double>::infinity();
  return r;
}

void observe(ConditionRecord& rec, double margin, const Point& x, int side) {
  ++rec.samples;
  if (margin < rec.margin) {
    rec.margin = margin;
    rec.where = x;
    rec.side = side;
  }
}

}  // namespace

Jet WeightSpec::phi(int side, const Point& x) const {
  const Jet psi = side == 1 ? psi1(x) : psi2(x);
  Jet out;
  out.value = std::exp(lambda * psi.value);
  out.grad = lambda * out.value * psi.grad;
  out.hess = lambda * out.value * (lambda * psi.grad * psi.grad.transpose() + psi.hess);
  return out;
}

Field linear_radial_field(int dim, double offset, double slope, double r0) {
  require(dim == 1 || dim == 2, "linear_radial_field: dim must be 1 or 2");
  return [=](const Point& x) {
    Jet j;
    if (dim == 1) {
      j.value = offset + slope * (r0 - x[0]);
      j.grad = Point(-slope, 0.0);
      return j;
    }
    const double r = x.norm();
    require(r > 0.0, "linear_radial_field: undefined at the origin");
    const Point u = x / r;
    j.value = offset + slope * (r0 - r);
    j.grad = -slope * u;
    j.hess = -slope * (Eigen::Matrix2d::Identity() - u * u.transpose()) / r;
    return j;
  };
}

Field quadratic_field(int dim, double offset, double curvature, const Point& center) {
  require(dim == 1 || dim == 2, "quadratic_field: dim must be 1 or 2");
  return [=](const Point& x) {
    Jet j;
    Point dx = x - center;
    if (dim == 1) dx[1] = 0.0;
    j.value = offset + curvature * dx.squaredNorm();
    j.grad = 2.0 * curvature * dx;
    j.hess(0, 0) = 2.0 * curvature;
    if (dim == 2) j.hess(1, 1) = 2.0 * curvature;
    return j;
  };
}

cplx eval_symbol(const WeightSpec& w, const Point& x, const Point& xi, double tau, int side) {
  check_side(w, x, side);
  const Jet f = w.phi(side, x);
  double re = xi.squaredNorm() - tau * tau * f.grad.squaredNorm();
  if (side == 2) re -= tau * tau;
  return {re, 2.0 * tau * xi.dot(f.grad)};
}

double poisson_bracket(const WeightSpec& w, const Point& x, const Point& xi, double tau, int side) {
  check_side(w, x, side);
  const Jet f = w.phi(side, x);
  return 4.0 * tau * (xi.dot(f.hess * xi) + tau * tau * f.grad.dot(f.hess * f.grad));
}

const ConditionRecord& WeightReport::condition(const std::string& id) const {
  for (const auto& c : conditions)
    if (c.id == id) return c;
  throw InvalidArgument("WeightReport: no condition " + id);
}

WeightReport check_weight_conditions(const WeightSpec& w, const Sampling& s) {
  const Geometry& g = w.geometry;
  require(w.lambda > 0.0, "check_weight_conditions: lambda must be positive");
  require(w.tau_min > 0.0 && w.tau_min < 1.0, "check_weight_conditions: tau_min must lie in (0, 1)");
  require(s.radial >= 16 && (g.dim == 1 || s.angular >= 16),
          "check_weight_conditions: at least 16 sample points per dimension");
  require(s.tau_levels >= 1 && s.directions >= 2, "check_weight_conditions: empty cosphere sampling");
  require(g.r_in < g.r0 && g.r0 < g.R && (g.dim == 1 || g.r_in > 0.0),
          "check_weight_conditions: geometry must satisfy r_in < r0 < R");

  WeightReport report;
  report.weight = w.name;
  report.dim = g.dim;
  const auto thetas = angles(g, s.angular);

  for (double th : thetas) {
    const Point x = at(g, g.r0, th);
    report.trace_gap = std::max(report.trace_gap, std::abs(w.phi(1, x).value - w.phi(2, x).value));
  }
  if (!(report.trace_gap <= s.trace_tol))
    throw InvalidArgument("check_weight_conditions: phi1 and phi2 differ by " + fmt17(report.trace_gap) +
                          " on the interface");

  ConditionRecord grad = make_record("GRAD");
  ConditionRecord outer = make_record("OUTER_SIGN");
  ConditionRecord iface = make_record("INTERFACE_SIGN");
  ConditionRecord jump = make_record("JUMP");
  ConditionRecord subell = make_record("SUBELL");

  double grad_scale = 0.0;
  std::vector<double> taus(s.tau_levels);
  for (int k = 0; k < s.tau_levels; ++k) taus[k] = w.tau_min + (1.0 - w.tau_min) * k / s.tau_levels;

  const auto consider_symbol = [&](const Point& x, const Point& xi, double tau, int side) {
    const cplx p = eval_symbol(w, x, xi, tau, side);
    if (std::abs(p) > s.eps_zero) return;
    const double b = poisson_bracket(w, x, xi, tau, side);
    report.near_zeros.push_back({x, xi, tau, side, p, b});
    observe(subell, b - s.c_min, x, side);
    if (side == 1) report.alpha_term_max = std::max(report.alpha_term_max, std::abs(tau * tau / (1.0 + w.alpha * tau)));
  };

  for (int side = 1; side <= 2; ++side) {
    const double lo = side == 1 ? g.r_in : g.r0;
    const double hi = side == 1 ? g.r0 : g.R;
    for (double r : linspace(lo, hi, s.radial)) {
      for (double th : thetas) {
        const Point x = at(g, r, th);
        const Jet f = w.phi(side, x);
        const double gn = f.grad.norm();
        grad_scale = std::max(grad_scale, gn);
        observe(grad, gn, x, side);

        for (double tau : taus) {
          const double m = std::sqrt(1.0 - tau * tau);
          if (g.dim == 1) {
            consider_symbol(x, Point(m, 0.0), tau, side);
            consider_symbol(x, Point(-m, 0.0), tau, side);
          } else {
            for (int j = 0; j < s.directions; ++j) {
              const double a = 2.0 * std::numbers::pi * j / s.directions;
              consider_symbol(x, Point(m * std::cos(a), m * std::sin(a)), tau, side);
            }
          }
        }
        // Exact zeros: xi orthogonal to grad phi with |xi|^2 = tau^2 (|grad phi|^2 + [side 2]).
        if (g.dim == 2 && gn > 0.0) {
          const double tau = 1.0 / std::sqrt(1.0 + gn * gn + (side == 2 ? 1.0 : 0.0));
          if (tau >= w.tau_min) {
            const Point t = Point(-f.grad[1], f.grad[0]) / gn;
            const double m = std::sqrt(1.0 - tau * tau);
            consider_symbol(x, m * t, tau, side);
            consider_symbol(x, -m * t, tau, side);
          }
        }
      }
    }
  }

  for (double th : thetas) {
    const Point n = radial_unit(g, th);
    const Point xr = at(g, g.R, th);
    observe(outer, -w.phi(2, xr).grad.dot(n), xr, 2);  // nu = +n on the outer boundary

    const Point x0 = at(g, g.r0, th);
    const double d1 = -w.phi(1, x0).grad.dot(n);  // nu = -n on the interface
    const double d2 = -w.phi(2, x0).grad.dot(n);
    observe(iface, d1, x0, 1);
    observe(iface, d2, x0, 2);
    observe(jump, d1 * d1 - d2 * d2 - 1.0, x0, 0);
  }

  grad.pass = grad.margin > 1e-12 * std::max(1.0, grad_scale);
  outer.pass = outer.margin > 0.0;
  iface.pass = iface.margin > 0.0;
  jump.pass = jump.margin > 0.0;
  subell.vacuous = subell.samples == 0;
  subell.pass = subell.vacuous || subell.margin >= 0.0;
  if (subell.vacuous) subell.margin = std::numeric_limits<double>::quiet_NaN();

  report.conditions = {grad, outer, iface, jump, subell};
  report.pass = std::all_of(report.conditions.begin(), report.conditions.end(),
                            [](const ConditionRecord& c) { return c.pass; });
  return report;
}

WeightSpec with_lambda(WeightSpec w, double lambda) {
  require(lambda > 0.0, "with_lambda: lambda must be positive");
  w.lambda = lambda;
  return w;
}

WeightSpec named_weight(const std::string& name, double lambda) {
  WeightSpec w;
  w.name = name;
  w.geometry = Geometry{};
  const double r0 = w.geometry.r0;
  if (name == "radial-linear" || name == "linear-normal" || name == "radial-linear-mild") {
    // psi2(R) >= 0 keeps psi positive, so raising lambda steepens phi on both
    // sides; lambda s1 and lambda s2 sit just above 1 / r on each side, which
    // leaves symbol zeros inside the sampled range tau >= tau_min.
    const bool mild = name == "radial-linear-mild";
    w.geometry.dim = name == "linear-normal" ? 1 : 2;
    w.lambda = mild ? 6.0 : 8.0;
    const double s1 = mild ? 0.7 : 0.575, s2 = mild ? 5.0 / 12.0 : 0.3125;
    const double offset = s2 * (w.geometry.R - r0) + (mild ? 0.02 : 0.0);
    w.psi1 = linear_radial_field(w.geometry.dim, offset, s1, r0);
    w.psi2 = linear_radial_field(w.geometry.dim, offset, s2, r0);
  } else if (name == "jump-violating") {
    // Interface normal derivatives 1 and sqrt(1/2): jump quantity 0.5.
    w.geometry.dim = 1;
    w.lambda = 1.0;
    w.psi1 = linear_radial_field(1, 0.0, 1.0, r0);
    w.psi2 = linear_radial_field(1, 0.0, std::sqrt(0.5), r0);
  } else if (name == "quadratic-critical") {
    // psi1 has its critical point at the middle of side 1.
    w.geometry.dim = 1;
    w.lambda = 1.0;
    const double center = 0.5 * (w.geometry.r_in + r0);
    w.psi1 = quadratic_field(1, 0.0, -1.0, Point(center, 0.0));
    w.psi2 = linear_radial_field(1, -(r0 - center) * (r0 - center), 0.5, r0);
  } else {
    throw InvalidArgument("named_weight: unknown weight '" + name + "'");
  }
  if (lambda > 0.0) w.lambda = lambda;
  return w;
}

std::vector<WeightSpec> weight_catalog() { return {named_weight("radial-linear"), named_weight("radial-linear-mild")}; }

void write_subell_csv(std::ostream& os, const WeightReport& report) {
  std::ostringstream buf;
  const auto vec = [&](const Point& p, bool two) {
    return two ? fmt17(p[0]) + " " + fmt17(p[1]) : fmt17(p[0]);
  };
  const bool two = report.dim == 2;
  buf << "x,xi,tau,side,abs_p,bracket\n";
  for (const auto& z : report.near_zeros)
    buf << vec(z.x, two) << ',' << vec(z.xi, two) << ',' << fmt17(z.tau) << ',' << z.side << ','
        << fmt17(std::abs(z.p_value)) << ',' << fmt17(z.bracket) << '\n';
  os << buf.str();
}

}  // namespace kvwave::carleman
