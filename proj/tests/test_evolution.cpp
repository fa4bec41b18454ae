#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kvwave/evolution.hpp"

using namespace kvwave;
using std::numbers::pi;

namespace {

OperatorSet interval_ops(Index n, double a, double b, double d,
                         Interiority check = Interiority::Strict) {
  return assemble_operators(build_interval_mesh(n, {a, b}, check), {d, IntervalOmega{a, b}});
}

double rel_diff(const OperatorSet& ops, const State& a, const State& b) {
  return energy_norm(ops, State{a.u - b.u, a.v - b.v}) / energy_norm(ops, b);
}

}  // namespace

TEST_CASE("midpoint step on zero data") {
  const OperatorSet ops = interval_ops(20, 0.3, 0.7, 1.0);
  const State z = step_midpoint(ops, State::zero(ops.n_dof), 0.01);
  CHECK(z.u.norm() == 0.0);
  CHECK(z.v.norm() == 0.0);
  CHECK_THROWS_AS(step_midpoint(ops, z, 0.0), InvalidArgument);
}

TEST_CASE("single undamped step conserves energy") {
  const OperatorSet ops = interval_ops(100, 0.3, 0.7, 0.0);
  const State z = random_unit_state(ops, 4);
  const State z1 = step_midpoint(ops, z, 0.05);
  CHECK(std::abs(energy(ops, z1) - energy(ops, z)) <= 1e-12 * energy(ops, z));
}

TEST_CASE("single damped step matches the dissipation identity") {
  const OperatorSet ops = assemble_operators(build_square_mesh(12, {0.25, 0.75, 0.25, 0.75}),
                                             {1.0, RectOmega{0.25, 0.75, 0.25, 0.75}});
  const State z = random_unit_state(ops, 8);
  const double dt = 0.02;
  const State z1 = step_midpoint(ops, z, dt);
  const Vec vmid = 0.5 * (z.v + z1.v);
  const double lost = dt * vmid.dot(ops.D * vmid);
  CHECK(lost > 0.0);
  CHECK(std::abs(energy(ops, z1) - energy(ops, z) + lost) <= 1e-11 * energy(ops, z));

  double reported = 0.0;
  const State z2 = Stepper(ops, dt).step(z, &reported);
  CHECK(reported == doctest::Approx(lost).epsilon(1e-12));
  CHECK(rel_diff(ops, z2, z1) <= 1e-14);
}

TEST_CASE("undamped simulation conserves energy") {
  const OperatorSet ops = interval_ops(100, 0.3, 0.7, 0.0);
  const EnergyTrace tr = simulate(ops, random_unit_state(ops, 1), 1e-2, 10.0);
  CHECK(tr.energies.size() == 1001);
  CHECK(tr.max_drift <= 1e-10);
  CHECK(tr.identity_residual <= 1e-10);
  CHECK(tr.times.back() == doctest::Approx(10.0));
}

TEST_CASE("damped simulation is monotone and satisfies the identity") {
  const OperatorSet ops = interval_ops(100, 0.3, 0.7, 1.0);
  const EnergyTrace tr = simulate(ops, random_unit_state(ops, 2), 1e-2, 10.0);
  CHECK(tr.monotone);
  CHECK(tr.identity_residual <= 1e-10);
  for (std::size_t n = 1; n < tr.energies.size(); ++n) {
    CHECK(tr.energies[n] >= 0.0);
    CHECK(tr.energies[n] <= tr.energies[n - 1] * (1 + 1e-12));
  }
  CHECK(tr.energies.back() < 0.5 * tr.energies.front());
}

TEST_CASE("fully damped first mode decays at the analytic rate") {
  const OperatorSet ops = interval_ops(200, 0.0, 1.0, 1.0, Interiority::Relaxed);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(ops.K), Mat(ops.M));
  const State z0{es.eigenvectors().col(0), Vec::Zero(ops.n_dof)};
  const EnergyTrace tr = simulate(ops, z0, 1e-3, 5.0);
  // The fast root dies out after t = 2; fit the slow one over [2, 5].
  const std::size_t a = 2000, b = 5000;
  const double rate = 0.5 * std::log(tr.energies[b] / tr.energies[a]) / (tr.times[b] - tr.times[a]);
  const double exact = (-pi * pi + std::sqrt(std::pow(pi, 4) - 4 * pi * pi)) / 2;
  CHECK(exact == doctest::Approx(-1.1292).epsilon(1e-4));
  CHECK(std::abs(rate - exact) <= 0.02 * std::abs(exact));
}

TEST_CASE("undamped scheme is time reversible") {
  const OperatorSet ops = interval_ops(100, 0.3, 0.7, 0.0);
  const State z0 = random_unit_state(ops, 5);
  const Stepper fwd(ops, 0.01), bwd(ops, -0.01);
  State z = z0;
  for (int n = 0; n < 100; ++n) z = fwd.step(z);
  for (int n = 0; n < 100; ++n) z = bwd.step(z);
  CHECK(rel_diff(ops, z, z0) <= 1e-12);
}

TEST_CASE("halving dt reduces the error fourfold") {
  const OperatorSet ops = interval_ops(60, 0.3, 0.7, 1.0);
  const State z0 = make_dAk_data(ops, 2, 9).z;
  std::vector<double> eT;
  for (double dt : {0.04, 0.02, 0.01, 0.005}) eT.push_back(simulate(ops, z0, dt, 1.0).energies.back());
  const double r1 = (eT[0] - eT[1]) / (eT[1] - eT[2]);
  const double r2 = (eT[1] - eT[2]) / (eT[2] - eT[3]);
  CHECK(r1 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(r2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("backward Euler dissipates more than the midpoint rule") {
  const OperatorSet ops = interval_ops(60, 0.3, 0.7, 0.0);
  const State z0 = random_unit_state(ops, 6);
  SimulateOptions be;
  be.scheme = Scheme::BackwardEuler;
  const EnergyTrace a = simulate(ops, z0, 0.01, 2.0, be);
  CHECK(a.monotone);
  CHECK(a.energies.back() < a.energies.front() * (1 - 1e-6));
}

TEST_CASE("non-finite data aborts") {
  const OperatorSet ops = interval_ops(20, 0.3, 0.7, 1.0);
  State z = random_unit_state(ops, 1);
  z.u[3] = std::nan("");
  CHECK_THROWS_AS(simulate(ops, z, 0.01, 0.1), NumericalError);
}

TEST_CASE("log decay report") {
  SUBCASE("undamped data grows against the log weight") {
    const OperatorSet ops = interval_ops(100, 0.3, 0.7, 0.0);
    const DomainData data = make_dAk_data(ops, 1, 3);
    const EnergyTrace tr = simulate(ops, data.z, 1e-2, 10.0);
    const DecayReport r = fit_log_decay(tr, 1, data.norm);
    CHECK(r.tail_growth > 1.5);
    CHECK(r.status == "FAIL");
    CHECK_FALSE(r.bounded);
  }
  SUBCASE("zero data") {
    const OperatorSet ops = interval_ops(20, 0.3, 0.7, 1.0);
    const EnergyTrace tr = simulate(ops, State::zero(ops.n_dof), 1e-2, 1.0);
    const DecayReport r = fit_log_decay(tr, 1, 1.0);
    CHECK(r.sup_ratio == 0.0);
    for (double x : r.ratio_series) CHECK(x == 0.0);
  }
  SUBCASE("k = 0 is inapplicable") {
    const OperatorSet ops = interval_ops(20, 0.3, 0.7, 1.0);
    const EnergyTrace tr = simulate(ops, random_unit_state(ops, 1), 1e-2, 1.0);
    const DecayReport r = fit_log_decay(tr, 0, 1.0);
    CHECK(r.status == "INAPPLICABLE");
    CHECK_FALSE(r.applicable);
  }
  SUBCASE("damped data stays bounded") {
    const OperatorSet ops = interval_ops(100, 0.3, 0.7, 1.0);
    const DomainData data = make_dAk_data(ops, 1, 3);
    const EnergyTrace tr = simulate(ops, data.z, 1e-2, 200.0, {Scheme::Midpoint, 1, data.norm});
    const DecayReport r = fit_log_decay(tr, 1, data.norm);
    CHECK(r.tail_growth <= 1.05);
    CHECK(r.status == "PASS");
    for (double x : r.ratio_series) CHECK((std::isfinite(x) && x >= 0.0));
  }
}

TEST_CASE("trace csv") {
  const OperatorSet ops = interval_ops(20, 0.3, 0.7, 1.0);
  const EnergyTrace tr = simulate(ops, random_unit_state(ops, 1), 0.1, 1.0);
  const DecayReport r = fit_log_decay(tr, 1, 1.0);
  std::ostringstream os;
  write_trace_csv(os, tr, &r, 3);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,E,diss_cum,ratio");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 5);  // n = 0, 3, 6, 9 and the final step 10
  CHECK(last.substr(0, 2) == "1,");
}
