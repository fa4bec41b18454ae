#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kvwave/assembly.hpp"

namespace kvwave {

enum class Scheme { Midpoint, BackwardEuler };

/// One-step integrator for dz/dt = A_h z with a prefactorized velocity system.
///
/// Midpoint solves (I - dt/2 A_h) z+ = (I + dt/2 A_h) z. Eliminating u+ leaves
/// (M + dt/2 D + dt^2/4 K) v+ = M v - dt/2 D v - dt K u - dt^2/4 K v, which is
/// symmetric and, for dt > 0, positive definite. A negative dt is accepted so
/// the undamped scheme can be run backwards. `ops` must outlive the stepper.
class Stepper {
 public:
  Stepper(const OperatorSet& ops, double dt, Scheme scheme = Scheme::Midpoint);

  /// Advances one step. `dissipation`, when given, receives
  /// dt * v_mid^T D v_mid (midpoint) or dt * v+^T D v+ (backward Euler).
  [[nodiscard]] State step(const State& z, double* dissipation = nullptr) const;

  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] Scheme scheme() const { return scheme_; }

 private:
  const OperatorSet* ops_;
  double dt_;
  Scheme scheme_;
  struct Solver;
  std::shared_ptr<const Solver> solver_;
};

/// Single implicit-midpoint step; dt must be positive.
State step_midpoint(const OperatorSet& ops, const State& z, double dt);

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> dissipation;  ///< dissipation[n] is lost over [t_n, t_{n+1}]
  double dt = 0.0;
  double T = 0.0;
  int k = 0;
  double initial_norm = 0.0;       ///< D(A^k) graph norm of the initial state
  double identity_residual = 0.0;  ///< max_n |E_n - E_0 + sum_{m<n} diss_m| / E_0
  double max_drift = 0.0;          ///< max_n |E_n - E_0| / E_0
  bool monotone = true;            ///< E_{n+1} <= E_n (1 + 1e-12) for all n
  State final_state;
};

struct SimulateOptions {
  Scheme scheme = Scheme::Midpoint;
  int k = 0;                  ///< recorded in the trace metadata only
  double initial_norm = -1;   ///< defaults to ||z0||_H when negative
};

/// Integrates from z0 over [0, T] with N = round(T / dt) steps. Non-finite
/// energies abort with NumericalError naming the step.
EnergyTrace simulate(const OperatorSet& ops, const State& z0, double dt, double T,
                     const SimulateOptions& options = {});

struct DecayReport {
  int k = 0;
  std::vector<double> ratio_series;  ///< E(t) (ln(2+t))^{2k} / ||z0||^2_{D(A^k)}
  double sup_ratio = 0.0;
  double tail_growth = 0.0;  ///< max over t > T/2 divided by max over t <= T/2
  double threshold = 1.05;
  bool applicable = true;    ///< false for k = 0 with nonzero data
  bool bounded = false;      ///< applicable and tail_growth <= threshold
  std::string status;        ///< PASS, FAIL or INAPPLICABLE
};

DecayReport fit_log_decay(const EnergyTrace& trace, int k, double norm_dAk,
                          double threshold = 1.05);

/// CSV `t,E,diss_cum,ratio`; `ratio` is left empty when no report is given.
void write_trace_csv(std::ostream& os, const EnergyTrace& trace, const DecayReport* report,
                     std::size_t stride = 1);

}  // namespace kvwave
