#include "kvwave/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "kvwave/io.hpp"

namespace kvwave {

struct Stepper::Solver {
  Eigen::SimplicialLDLT<SpMat> ldlt;
};

Stepper::Stepper(const OperatorSet& ops, double dt, Scheme scheme)
    : ops_(&ops), dt_(dt), scheme_(scheme) {
  require(dt != 0.0 && std::isfinite(dt), "Stepper: dt must be finite and nonzero");
  SpMat s = scheme == Scheme::Midpoint ? SpMat(ops.M + (0.5 * dt) * ops.D + (0.25 * dt * dt) * ops.K)
                                       : SpMat(ops.M + dt * ops.D + (dt * dt) * ops.K);
  auto solver = std::make_shared<Solver>();
  solver->ldlt.compute(s);
  if (solver->ldlt.info() != Eigen::Success)
    throw NumericalError("Stepper: factorization of the velocity system failed");
  solver_ = std::move(solver);
}

State Stepper::step(const State& z, double* dissipation) const {
  const OperatorSet& ops = *ops_;
  require(z.u.size() == ops.n_dof && z.v.size() == ops.n_dof, "Stepper::step: state dimension mismatch");
  const double dt = dt_;
  State next;
  if (scheme_ == Scheme::Midpoint) {
    const Vec kv = ops.K * z.v;
    const Vec rhs = ops.M * z.v - (0.5 * dt) * (ops.D * z.v) - dt * (ops.K * z.u) - (0.25 * dt * dt) * kv;
    next.v = solver_->ldlt.solve(rhs);
    next.u = z.u + (0.5 * dt) * (z.v + next.v);
    if (dissipation) {
      const Vec vmid = 0.5 * (z.v + next.v);
      *dissipation = dt * vmid.dot(ops.D * vmid);
    }
  } else {
    const Vec rhs = ops.M * z.v - dt * (ops.K * z.u);
    next.v = solver_->ldlt.solve(rhs);
    next.u = z.u + dt * next.v;
    if (dissipation) *dissipation = dt * next.v.dot(ops.D * next.v);
  }
  return next;
}

State step_midpoint(const OperatorSet& ops, const State& z, double dt) {
  require(dt > 0.0, "step_midpoint: dt must be positive");
  return Stepper(ops, dt, Scheme::Midpoint).step(z);
}

EnergyTrace simulate(const OperatorSet& ops, const State& z0, double dt, double T,
                     const SimulateOptions& options) {
  require(dt > 0.0 && std::isfinite(dt), "simulate: dt must be positive");
  require(T >= dt, "simulate: T must be at least dt");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt));
  const Stepper stepper(ops, dt, options.scheme);

  EnergyTrace trace;
  trace.dt = dt;
  trace.T = static_cast<double>(steps) * dt;
  trace.k = options.k;
  trace.initial_norm = options.initial_norm >= 0 ? options.initial_norm : energy_norm(ops, z0);
  trace.times.reserve(steps + 1);
  trace.energies.reserve(steps + 1);
  trace.dissipation.reserve(steps);

  State z = z0;
  const double e0 = energy(ops, z0);
  trace.times.push_back(0.0);
  trace.energies.push_back(e0);
  double cumulative = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    double diss = 0.0;
    z = stepper.step(z, &diss);
    const double e = energy(ops, z);
    if (!std::isfinite(e) || !std::isfinite(diss))
      throw NumericalError("simulate: non-finite energy at step " + std::to_string(n + 1));
    cumulative += diss;
    const double prev = trace.energies.back();
    if (e > prev * (1.0 + 1e-12) + 1e-300) trace.monotone = false;
    trace.times.push_back(static_cast<double>(n + 1) * dt);
    trace.energies.push_back(e);
    trace.dissipation.push_back(diss);
    if (e0 > 0.0) {
      trace.identity_residual = std::max(trace.identity_residual, std::abs(e - e0 + cumulative) / e0);
      trace.max_drift = std::max(trace.max_drift, std::abs(e - e0) / e0);
    }
  }
  trace.final_state = std::move(z);
  return trace;
}

DecayReport fit_log_decay(const EnergyTrace& trace, int k, double norm_dAk, double threshold) {
  require(!trace.energies.empty(), "fit_log_decay: empty trace");
  require(k >= 0, "fit_log_decay: k must be nonnegative");
  require(norm_dAk > 0.0 || trace.energies.front() == 0.0, "fit_log_decay: norm must be positive");

  DecayReport report;
  report.k = k;
  report.threshold = threshold;
  const double e0 = trace.energies.front();
  const double scale = norm_dAk > 0.0 ? 1.0 / (norm_dAk * norm_dAk) : 0.0;
  report.ratio_series.resize(trace.energies.size());
  for (std::size_t n = 0; n < trace.energies.size(); ++n) {
    const double lg = std::log(2.0 + trace.times[n]);
    report.ratio_series[n] = trace.energies[n] * std::pow(lg, 2.0 * k) * scale;
  }
  const double half = 0.5 * trace.times.back();
  double first = 0.0, last = 0.0;
  for (std::size_t n = 0; n < report.ratio_series.size(); ++n) {
    double& slot = trace.times[n] <= half ? first : last;
    slot = std::max(slot, report.ratio_series[n]);
  }
  report.sup_ratio = std::max(first, last);
  report.tail_growth = first > 0.0 ? last / first : 0.0;

  report.applicable = !(k == 0 && e0 > 0.0);
  report.bounded = report.applicable && report.tail_growth <= threshold;
  report.status = !report.applicable ? "INAPPLICABLE" : (report.bounded ? "PASS" : "FAIL");
  return report;
}

void write_trace_csv(std::ostream& os, const EnergyTrace& trace, const DecayReport* report,
                     std::size_t stride) {
  require(stride >= 1, "write_trace_csv: stride must be positive");
  std::ostringstream buf;
  buf << "t,E,diss_cum,ratio\n";
  double cumulative = 0.0;
  for (std::size_t n = 0; n < trace.energies.size(); ++n) {
    if (n > 0) cumulative += trace.dissipation[n - 1];
    if (n % stride != 0 && n + 1 != trace.energies.size()) continue;
    buf << fmt17(trace.times[n]) << ',' << fmt17(trace.energies[n]) << ',' << fmt17(cumulative) << ',';
    if (report) buf << fmt17(report->ratio_series[n]);
    buf << '\n';
  }
  os << buf.str();
}

}  // namespace kvwave
