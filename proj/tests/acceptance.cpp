// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kvwave/carleman.hpp"
#include "kvwave/evolution.hpp"
#include "kvwave/helmholtz.hpp"
#include "kvwave/parallel.hpp"
#include "kvwave/resolvent.hpp"
#include "kvwave/spectral.hpp"
#include "kvwave/transmission.hpp"

using namespace kvwave;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& s) { std::printf("     info: %s\n", s.c_str()); }

OperatorSet interval_ops(Index n, double a, double b, double d,
                         Interiority check = Interiority::Strict) {
  return assemble_operators(build_interval_mesh(n, {a, b}, check), {d, IntervalOmega{a, b}});
}

OperatorSet square_ops(Index n, RectOmega w, double d) {
  return assemble_operators(build_square_mesh(n, w), {d, w});
}

double nearest(const CVec& values, cplx target) {
  double best = INFINITY;
  for (Index i = 0; i < values.size(); ++i) best = std::min(best, std::abs(values[i] - target));
  return best;
}

Outcome energy_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    std::uniform_real_distribution<double> ud(0.1, 3.0);
    const double d = ud(rng);
    OperatorSet ops;
    if (c % 2 == 0) {
      const Index n = std::uniform_int_distribution<Index>(50, 200)(rng);
      std::uniform_int_distribution<Index> node(1, n - 1);
      Index i = node(rng), j = node(rng);
      while (j == i) j = node(rng);
      const double a = double(std::min(i, j)) / n, b = double(std::max(i, j)) / n;
      ops = interval_ops(n, a, b, d);
    } else {
      const Index n = std::uniform_int_distribution<Index>(8, 16)(rng);
      std::uniform_int_distribution<Index> node(1, n - 1);
      Index x0 = node(rng), x1 = node(rng), y0 = node(rng), y1 = node(rng);
      while (x1 == x0) x1 = node(rng);
      while (y1 == y0) y1 = node(rng);
      ops = square_ops(n, {double(std::min(x0, x1)) / n, double(std::max(x0, x1)) / n,
                           double(std::min(y0, y1)) / n, double(std::max(y0, y1)) / n}, d);
    }
    const EnergyTrace tr = simulate(ops, random_unit_state(ops, 1000 + c), 1e-2, 10.0);
    worst = std::max(worst, tr.identity_residual);
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 60.0,
          fmt("20 configurations, max identity residual %.2e (tol 1e-10), %.1f s (limit 60 s)", worst, t)};
}

Outcome undamped_conservation() {
  double drift = 0.0, back = 0.0;
  for (int dim : {1, 2}) {
    const OperatorSet ops = dim == 1 ? interval_ops(100, 0.3, 0.7, 0.0) : square_ops(12, {0.25, 0.75, 0.25, 0.75}, 0.0);
    const State z0 = random_unit_state(ops, 7 + dim);
    const EnergyTrace tr = simulate(ops, z0, 1e-2, 10.0);
    drift = std::max(drift, tr.max_drift);
    const Stepper bwd(ops, -1e-2);
    State z = tr.final_state;
    for (std::size_t n = 1; n < tr.times.size(); ++n) z = bwd.step(z);
    back = std::max(back, energy_norm(ops, State{z.u - z0.u, z.v - z0.v}) / energy_norm(ops, z0));
  }
  return {drift <= 1e-10 && back <= 1e-12,
          fmt("max drift %.2e (tol 1e-10), reversal error %.2e (tol 1e-12), T = 10 in 1D and 2D", drift, back)};
}

Outcome analytic_eigenvalues() {
  const auto t0 = Clock::now();
  const double disc = std::sqrt(std::pow(pi, 4) - 4 * pi * pi);
  const double r1 = (-pi * pi + disc) / 2, r2 = (-pi * pi - disc) / 2;
  const Spectrum damped = solve_qep(interval_ops(200, 0.0, 1.0, 1.0, Interiority::Relaxed));
  const double e1 = nearest(damped.eigenvalues, r1) / std::abs(r1);
  const double e2 = nearest(damped.eigenvalues, r2) / std::abs(r2);
  const Spectrum free = solve_qep(interval_ops(200, 0.3, 0.7, 0.0));
  const double e3 = std::max(nearest(free.eigenvalues, cplx(0, pi)), nearest(free.eigenvalues, cplx(0, -pi)));
  const double t = seconds_since(t0);
  return {e1 <= 0.02 && e2 <= 0.02 && e3 <= 1e-3 && t < 30.0,
          fmt("relative errors %.2e at %.4f and %.2e at %.4f (tol 2%%), |lambda - (+/-i pi)| = %.2e (tol 1e-3), "
              "%.1f s (limit 30 s)",
              e1, r1, e2, r2, e3, t)};
}

Outcome strong_stability() {
  struct Case {
    std::string label;
    std::function<OperatorSet()> build;
  };
  std::vector<Case> cases;
  for (Index n : {100, 200})
    for (auto [a, b] : std::vector<std::pair<double, double>>{{0.3, 0.7}, {0.1, 0.2}, {0.45, 0.55}})
      for (double d : {0.1, 1.0, 10.0})
        cases.push_back({fmt("1D n=%d (%.2f,%.2f) d=%g", int(n), a, b, d),
                         [=] { return interval_ops(n, a, b, d); }});
  for (RectOmega w : {RectOmega{0.25, 0.75, 0.25, 0.75}, RectOmega{0.25, 0.5, 0.5, 0.75}})
    for (double d : {0.5, 2.0})
      cases.push_back({fmt("2D n=16 [%.2f,%.2f]x[%.2f,%.2f] d=%g", w.x0, w.x1, w.y0, w.y1, d),
                       [=] { return square_ops(16, w, d); }});

  std::vector<std::size_t> offenders(cases.size());
  std::vector<double> max_re(cases.size());
  parallel_for(cases.size(), 4, [&](std::size_t k) {
    const Spectrum s = solve_qep(cases[k].build());
    const StabilityReport r = verify_strong_stability(s, 1e-10);
    std::size_t plain = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s.trusted[i] && s.eigenvalues[i].real() >= 0.0) ++plain;
    offenders[k] = std::max(plain, r.offenders.size());
    max_re[k] = r.max_real;
  });
  std::size_t total = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    total += offenders[k];
    if (offenders[k]) info(cases[k].label + fmt(": %zu offenders", offenders[k]));
  }
  return {total == 0, fmt("%zu damped configurations, %zu offenders, largest Re(lambda) %.3e",
                          cases.size(), total, *std::max_element(max_re.begin(), max_re.end()))};
}

Outcome liu_liu() {
  const BandReport loc = band_abscissa(solve_qep(interval_ops(800, 0.3, 0.7, 1.0)), 12);
  const BandReport ctl = band_abscissa(solve_qep(interval_ops(800, 0.0, 1.0, 1.0, Interiority::Relaxed)), 12);
  std::string table;
  std::vector<double> tail;
  for (const Band& b : loc.bands)
    if (b.abscissa) {
      table += fmt(" [%g,%g):%.4f", b.lo, b.hi, *b.abscissa);
      tail.push_back(*b.abscissa);
    }
  info("localized band abscissae" + table);
  double last_ctl = NAN;
  for (const Band& b : ctl.bands)
    if (b.abscissa) last_ctl = *b.abscissa;
  const bool ctl_ok = !ctl.trend && std::abs(last_ctl + 1.0) <= 0.02;
  return {loc.trend && ctl_ok,
          fmt("localized trend=%s (last three bands %.4f < %.4f < %.4f); control last band %.4f (target -1, tol 2%%), "
              "control trend=%s",
              loc.trend ? "true" : "false", tail.size() >= 3 ? tail[tail.size() - 3] : NAN,
              tail.size() >= 2 ? tail[tail.size() - 2] : NAN, tail.empty() ? NAN : tail.back(), last_ctl,
              ctl.trend ? "true" : "false")};
}

Outcome transmission_oracle() {
  const DampingField d1{1.0, IntervalOmega{0.3, 0.7}};
  const RectOmega w{0.25, 0.75, 0.25, 0.5};
  const DampingField d2{0.7, w};
  const OperatorSet one = assemble_operators(build_interval_mesh(200, {0.3, 0.7}), d1);
  const OperatorSet two = assemble_operators(build_square_mesh(16, w), d2);
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> umu(0.5, 60.0);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    const double mu = umu(rng);
    const OperatorSet& ops = c % 2 ? two : one;
    const CState rhs = random_rhs(ops, mu, 6000 + c);
    worst = std::max(worst, transmission_equivalence(ops, c % 2 ? d2 : d1, mu, rhs.u, rhs.v));
  }
  return {worst <= 1e-8, fmt("50 cases (1D and 2D, mu in [0.5, 60]), max energy-norm difference %.2e (tol 1e-8)", worst)};
}

Outcome resolvent_bound() {
  const OperatorSet ops = interval_ops(400, 0.3, 0.7, 1.0);
  ScanOptions so;
  so.jobs = 4;
  const ResolventScan s = scan_resolvent(ops, default_mu_grid(), so);
  const bool all_ok = std::all_of(s.flags.begin(), s.flags.end(), [](const std::string& f) { return f == "ok"; });
  const bool finite = std::isfinite(s.C1) && std::isfinite(s.C2);
  info(fmt("damped scan n=400: C1 = %.4f, C2 = %.3e, growth exponent %.3f, max mu h = %.3f", s.C1, s.C2,
           s.growth_exponent, 60.0 * ops.mesh->h));
  info(fmt("pointwise norms: mu=5 -> %.4f, mu=40 -> %.4f", s.norms[10], s.norms[80]));

  const OperatorSet free = interval_ops(400, 0.3, 0.7, 0.0);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(free.K), Mat(free.M), Eigen::EigenvaluesOnly);
  std::vector<double> grid;
  for (double mu = 0.25; mu < 60.0; mu += 0.5) grid.push_back(mu);
  std::vector<double> dev(grid.size());
  parallel_for(grid.size(), 4, [&](std::size_t k) {
    double dist = INFINITY;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
      dist = std::min(dist, std::abs(grid[k] - std::sqrt(es.eigenvalues()[i])));
    dev[k] = std::abs(resolvent_norm(free, grid[k]).norm * dist - 1.0);
  });
  const double worst = *std::max_element(dev.begin(), dev.end());
  return {s.covered && finite && all_ok && worst <= 1e-3,
          fmt("envelope (%.4f, %.3e) covers %zu/%zu samples, all mu h <= 0.6: %s; undamped control max "
              "|norm * dist - 1| = %.2e over %zu samples (tol 1e-3)",
              s.C1, s.C2, s.fitted, s.mu_values.size(), all_ok ? "yes" : "no", worst, grid.size())};
}

Outcome interface_dissipation() {
  const std::vector<double> grid{1, 2, 5, 10, 20, 30, 40, 50, 60};
  struct Case {
    std::string label;
    OperatorSet ops;
  };
  std::vector<Case> cases;
  cases.push_back({"1D n=200 (0.3,0.7) d=1", interval_ops(200, 0.3, 0.7, 1.0)});
  cases.push_back({"1D n=200 (0.1,0.4) d=0.3", interval_ops(200, 0.1, 0.4, 0.3)});
  cases.push_back({"2D n=16 [0.25,0.75]^2 d=1", square_ops(16, {0.25, 0.75, 0.25, 0.75}, 1.0)});
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const DissipationStudy st = interface_dissipation_study(cases[k].ops, grid, 20, 800 + k, 4);
    pass = pass && st.covered && std::isfinite(st.C_fit);
    detail += fmt("%s%s: C = %.4f, max sample %.4f", k ? "; " : "", cases[k].label.c_str(), st.C_fit,
                  st.max_sample_ratio);
  }
  return {pass, "20 rhs per mu, mu in {1,...,60}; " + detail};
}

HelmholtzStudy helmholtz_run(double d) {
  HelmholtzStudyOptions o;
  o.trial.d = d;
  o.trial.trials = 100;
  o.trial.seed = 909;
  o.resolutions = {200, 400, 800};
  o.jobs = 4;
  return helmholtz_study([](Index n) { return build_interval_mesh(n, {0.3, 0.7}); }, o);
}

std::string helmholtz_table(const HelmholtzStudy& s) {
  std::string t;
  for (std::size_t r = 0; r < s.resolutions.size(); ++r) {
    t += fmt(" n=%d:", int(s.resolutions[r]));
    for (double v : s.max_ratio[r]) t += fmt(" %.4f", v);
  }
  return t;
}

Outcome helmholtz_lemma() {
  const HelmholtzStudy s = helmholtz_run(1.0);
  info("d=1 max ratios at mu = 10, 20, 40:" + helmholtz_table(s));
  info(fmt("d=1 one-sided growth max r(mu_next)/r(mu) = %.4f (uniform within 20%%: %s)", s.mu_growth,
           s.mu_uniform ? "yes" : "no"));
  const HelmholtzStudy half = helmholtz_run(0.5);
  info("d=0.5 max ratios:" + helmholtz_table(half) +
       fmt(" (mesh dev %.3f, mu dev %.3f)", half.mesh_deviation, half.mu_deviation));
  return {s.mesh_stable && s.mu_stable,
          fmt("d=1, O = (0.3,0.7), 100 trials: mesh deviation %.3f, mu deviation %.3f (band 0.20)",
              s.mesh_deviation, s.mu_deviation)};
}

Outcome log_decay() {
  const OperatorSet ops = interval_ops(100, 0.3, 0.7, 1.0);
  std::string detail;
  bool pass = true;
  for (int k : {1, 2}) {
    const DomainData data = make_dAk_data(ops, k, 40 + k);
    const EnergyTrace tr = simulate(ops, data.z, 1e-2, 200.0, {Scheme::Midpoint, k, data.norm});
    const DecayReport r = fit_log_decay(tr, k, data.norm);
    pass = pass && r.bounded;
    detail += fmt("k=%d tail_growth %.4f sup %.3e; ", k, r.tail_growth, r.sup_ratio);
  }
  const OperatorSet free = interval_ops(100, 0.3, 0.7, 0.0);
  const DomainData data = make_dAk_data(free, 1, 41);
  const DecayReport ctl = fit_log_decay(simulate(free, data.z, 1e-2, 200.0), 1, data.norm);
  pass = pass && !ctl.bounded;
  detail += fmt("undamped control tail_growth %.4f -> %s (threshold 1.05)", ctl.tail_growth, ctl.status.c_str());
  return {pass, detail};
}

double fd_bracket(const carleman::WeightSpec& w, const carleman::Point& x, const carleman::Point& xi, double tau,
                  int side) {
  const double h = 1e-5;
  double b = 0.0;
  for (int j = 0; j < w.geometry.dim; ++j) {
    carleman::Point e = carleman::Point::Zero();
    e[j] = h;
    const cplx dxi = (carleman::eval_symbol(w, x, xi + e, tau, side) - carleman::eval_symbol(w, x, xi - e, tau, side)) / (2 * h);
    const cplx dx = (carleman::eval_symbol(w, x + e, xi, tau, side) - carleman::eval_symbol(w, x - e, xi, tau, side)) / (2 * h);
    b += dxi.real() * dx.imag() - dx.real() * dxi.imag();
  }
  return b;
}

Outcome carleman_hypotheses() {
  namespace cm = carleman;
  bool catalog_ok = true;
  std::string detail;
  for (const auto& w : cm::weight_catalog()) {
    const cm::WeightReport r = cm::check_weight_conditions(w);
    double least = INFINITY;
    for (const auto& c : r.conditions) {
      catalog_ok = catalog_ok && c.pass && !c.vacuous && c.margin > 0.0;
      least = std::min(least, c.margin);
    }
    detail += fmt("%s (lambda %g) least margin %.3f; ", w.name.c_str(), w.lambda, least);
  }
  const cm::WeightReport bad = cm::check_weight_conditions(cm::named_weight("jump-violating"));
  bool only_jump = !bad.pass;
  for (const auto& c : bad.conditions) only_jump = only_jump && (c.pass == (c.id != "JUMP"));
  detail += fmt("jump-violating fails only JUMP: %s (margin %.4f); ", only_jump ? "yes" : "no",
                bad.condition("JUMP").margin);

  std::mt19937_64 rng(1111);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ut(0.05, 1.0);
  double homog = 0.0, fd = 0.0;
  const auto catalog = cm::weight_catalog();
  for (int k = 0; k < 100; ++k) {
    const cm::WeightSpec& w = catalog[k % catalog.size()];
    const int side = 1 + (k / 2) % 2;
    const cm::Geometry& g = w.geometry;
    const double lo = side == 1 ? g.r_in : g.r0, hi = side == 1 ? g.r0 : g.R;
    const double r = lo + 0.01 + (hi - lo - 0.02) * (0.5 + 0.5 * u(rng));
    const double a = pi * u(rng);
    const cm::Point x(r * std::cos(a), r * std::sin(a));
    const double tau = ut(rng);
    cm::Point xi(u(rng), u(rng));
    xi *= std::sqrt(1 - tau * tau) / xi.norm();
    const double b = cm::poisson_bracket(w, x, xi, tau, side);
    const cplx p = cm::eval_symbol(w, x, xi, tau, side);
    const double s = 3.7;
    homog = std::max(homog, std::abs(cm::eval_symbol(w, x, s * xi, s * tau, side) - s * s * p) / (s * s * std::abs(p)));
    homog = std::max(homog, std::abs(cm::poisson_bracket(w, x, s * xi, s * tau, side) - s * s * s * b) / std::abs(s * s * s * b));
    const cm::Jet f = w.phi(side, x);
    const double scale = std::max(std::abs(b), 4 * tau * f.hess.norm() * (xi.squaredNorm() + tau * tau * f.grad.squaredNorm()));
    fd = std::max(fd, std::abs(fd_bracket(w, x, xi, tau, side) - b) / scale);
  }
  detail += fmt("homogeneity %.2e (tol 1e-10), FD bracket %.2e (tol 1e-6) on 100 samples", homog, fd);
  return {catalog_ok && only_jump && homog <= 1e-10 && fd <= 1e-6, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "energy identity", energy_identity},
      {2, "undamped conservation and reversibility", undamped_conservation},
      {3, "analytic eigenvalues", analytic_eigenvalues},
      {4, "strong stability", strong_stability},
      {5, "high-frequency band abscissa", liu_liu},
      {6, "transmission oracle", transmission_oracle},
      {7, "resolvent bound consistency", resolvent_bound},
      {8, "interface dissipation inequality", interface_dissipation},
      {9, "Helmholtz H1 ratio stability", helmholtz_lemma},
      {10, "log-decay boundedness", log_decay},
      {11, "Carleman weight hypotheses", carleman_hypotheses},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed ? 1 : 0;
}
