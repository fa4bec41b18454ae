#include "kvwave/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "kvwave/dense.hpp"
#include "kvwave/io.hpp"
#include "kvwave/parallel.hpp"

namespace kvwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using ComplexLU = Eigen::SparseLU<CSpMat>;

// Real lower-triangular sparse factor applied to complex vectors.
CVec lower_solve(const SpMat& l, const CVec& b) {
  const auto tri = l.triangularView<Eigen::Lower>();
  CVec out(b.size());
  out.real() = tri.solve(Vec(b.real()));
  out.imag() = tri.solve(Vec(b.imag()));
  return out;
}

CVec lower_transpose_solve(const SpMat& l, const CVec& b) {
  const auto tri = l.transpose().triangularView<Eigen::Upper>();
  CVec out(b.size());
  out.real() = tri.solve(Vec(b.real()));
  out.imag() = tri.solve(Vec(b.imag()));
  return out;
}

CSpMat shifted_pencil(const OperatorSet& ops, double mu) {
  const cplx i_mu(0.0, mu);
  CSpMat q = ops.K.cast<cplx>() + i_mu * ops.D.cast<cplx>() - cplx(mu * mu) * ops.M.cast<cplx>();
  q.makeCompressed();
  return q;
}

double largest_generalized_eigenvalue(const OperatorSet& ops, const SpMat& a, int iterations = 40) {
  Vec x = Vec::Ones(ops.n_dof);
  double lam = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Vec y = ops.solve_mass(Vec(a * x));
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    lam = x.dot(a * x) / x.dot(ops.M * x);
    x = y / nrm;
  }
  return std::max(lam, x.dot(a * x) / x.dot(ops.M * x));
}

// Generator in energy coordinates y = (Lk^T u, Lm^T v):
// T = [[0, B], [-B^T, -Dt]] with B = Lk^T Lm^{-T}, Dt = Lm^{-1} D Lm^{-T}.
Mat energy_coordinate_generator(const OperatorSet& ops) {
  const Index n = ops.n_dof;
  const Mat lm = Mat(ops.mass_factor());
  const Mat lk = Mat(ops.stiffness_factor());
  const auto lmt = lm.triangularView<Eigen::Lower>();
  const Mat b = lmt.solve(lk).transpose();
  const Mat y = lmt.solve(Mat(ops.D));
  const Mat dt = lmt.solve(Mat(y.transpose()));
  Mat t = Mat::Zero(2 * n, 2 * n);
  t.topRightCorner(n, n) = b;
  t.bottomLeftCorner(n, n) = -b.transpose();
  t.bottomRightCorner(n, n) = -0.5 * (dt + dt.transpose());
  return t;
}

class NormEvaluator {
 public:
  NormEvaluator(const OperatorSet& ops, const ResolventOptions& options) : ops_(ops), options_(options) {
    dense_ = options.method == NormMethod::Dense ||
             (options.method == NormMethod::Auto && ops.n_dof <= options.dense_limit);
    if (dense_) {
      t_ = energy_coordinate_generator(ops);
    } else {
      const double kmax = largest_generalized_eigenvalue(ops, ops.K);
      const double dmax = ops.d > 0.0 ? largest_generalized_eigenvalue(ops, ops.D) : 0.0;
      operator_scale_ = std::sqrt(kmax) + dmax;
    }
  }

  [[nodiscard]] NormResult operator()(double mu) const { return dense_ ? dense(mu) : iterative(mu); }

 private:
  [[nodiscard]] NormResult dense(double mu) const {
    CMat shifted = t_.cast<cplx>();
    shifted.diagonal().array() -= cplx(0.0, mu);
    const Vec s = dense::singular_values(shifted);
    NormResult r;
    r.dense = true;
    r.scale = s.maxCoeff();
    r.sigma_min = s.minCoeff();
    finish(r);
    return r;
  }

  [[nodiscard]] NormResult iterative(double mu) const {
    const Index n = ops_.n_dof;
    NormResult r;
    r.scale = operator_scale_ + std::abs(mu);
    ComplexLU lu;
    lu.compute(shifted_pencil(ops_, mu));
    if (lu.info() != Eigen::Success) {
      r.singular = true;
      r.norm = kInf;
      return r;
    }
    const SpMat& lm = ops_.mass_factor();
    const SpMat& lk = ops_.stiffness_factor();
    const cplx i_mu(0.0, mu);

    // y -> (T - i mu)^{-1} y through the sparse pencil.
    const auto forward = [&](const CVec& y) {
      const CVec f = lower_transpose_solve(lk, y.head(n));
      const CVec g = lower_transpose_solve(lm, y.tail(n));
      const CVec rhs = -(ops_.M * g) - i_mu * (ops_.M * f) - ops_.D * f;
      const CVec u = lu.solve(rhs);
      const CVec v = i_mu * u + f;
      CVec out(2 * n);
      out.head(n) = lk.transpose() * u;
      out.tail(n) = lm.transpose() * v;
      return out;
    };
    // y -> (T - i mu)^{-H} y; the adjoint pencil is -conj(Q).
    const auto adjoint = [&](const CVec& y) {
      const CVec p = lk * y.head(n);
      const CVec q = lm * y.tail(n);
      const CVec rhs = p - i_mu * q;
      const CVec c = -CVec(lu.solve(CVec(rhs.conjugate()))).conjugate();
      const CVec a = q + ops_.D * c - i_mu * (ops_.M * c);
      const CVec b = ops_.M * c;
      CVec out(2 * n);
      out.head(n) = lower_solve(lk, a);
      out.tail(n) = lower_solve(lm, b);
      return out;
    };

    // Lanczos with full reorthogonalization on (T - i mu)^{-H} (T - i mu)^{-1}.
    const Index dim = 2 * n;
    const int m = static_cast<int>(std::min<Index>(dim, options_.max_iter));
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> normal;
    CMat basis(dim, m + 1);
    CVec q0(dim);
    for (Index i = 0; i < dim; ++i) q0[i] = cplx(normal(rng), normal(rng));
    basis.col(0) = q0 / q0.norm();
    std::vector<double> alpha, beta;
    double theta = 0.0, previous = 0.0;
    for (int j = 0; j < m; ++j) {
      CVec w = adjoint(forward(basis.col(j)));
      alpha.push_back(basis.col(j).dot(w).real());
      for (int pass = 0; pass < 2; ++pass) w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).adjoint() * w);
      const double b = w.norm();
      Mat tri = Mat::Zero(j + 1, j + 1);
      for (int k = 0; k <= j; ++k) {
        tri(k, k) = alpha[k];
        if (k > 0) tri(k, k - 1) = tri(k - 1, k) = beta[k - 1];
      }
      const Eigen::SelfAdjointEigenSolver<Mat> es(tri);
      theta = es.eigenvalues()[j];
      const double ritz_residual = b * std::abs(es.eigenvectors()(j, j));
      if (!std::isfinite(theta)) break;
      const bool converged = ritz_residual <= options_.rel_tol * theta ||
                             (j > 2 && std::abs(theta - previous) <= options_.rel_tol * theta);
      previous = theta;
      if (converged || b <= 1e-300 || j + 1 == m) break;
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }
    r.sigma_min = theta > 0.0 ? 1.0 / std::sqrt(theta) : kInf;
    finish(r);
    return r;
  }

  void finish(NormResult& r) const {
    r.singular = !std::isfinite(r.sigma_min) || r.sigma_min <= options_.singular_tol * r.scale;
    r.norm = r.singular ? kInf : 1.0 / r.sigma_min;
  }

  const OperatorSet& ops_;
  ResolventOptions options_;
  bool dense_ = false;
  Mat t_;
  double operator_scale_ = 0.0;
};

}  // namespace

NormResult resolvent_norm(const OperatorSet& ops, double mu, const ResolventOptions& options) {
  require(std::isfinite(mu), "resolvent_norm: mu must be finite");
  return NormEvaluator(ops, options)(mu);
}

Envelope fit_envelope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "fit_envelope: x and y differ in length");
  require(!x.empty(), "fit_envelope: no samples");
  const std::size_t n = x.size();
  Envelope best;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) {
    best.degenerate = true;
    best.C2 = 0.0;
    best.C1 = *std::max_element(y.begin(), y.end());
    return best;
  }

  double ymax = 0.0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const double slack = 1e-12 * (1.0 + ymax);
  double best_cost = kInf;
  const auto consider = [&](double c1, double c2) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = c1 + c2 * x[i] - y[i];
      if (r < -slack) return;
      cost += r * r;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best.C1 = c1;
      best.C2 = c2;
    }
  };

  // The optimum of this two-variable convex QP has at most two active
  // constraints; enumerate every candidate active set.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  consider(my - (sxy / sxx) * mx, sxy / sxx);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      num += (x[j] - x[i]) * (y[j] - y[i]);
      den += (x[j] - x[i]) * (x[j] - x[i]);
    }
    const double c2 = den > 0.0 ? num / den : 0.0;
    consider(y[i] - c2 * x[i], c2);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x[i] == x[j]) continue;
      const double c2 = (y[j] - y[i]) / (x[j] - x[i]);
      consider(y[i] - c2 * x[i], c2);
    }
  }
  if (!std::isfinite(best_cost)) throw NumericalError("fit_envelope: no feasible line found");
  // Absorb the rounding slack so coverage holds exactly.
  double lift = 0.0;
  for (std::size_t i = 0; i < n; ++i) lift = std::max(lift, y[i] - best.C1 - best.C2 * x[i]);
  best.C1 += lift;
  return best;
}

std::vector<double> default_mu_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 120; ++i) grid.push_back(0.5 * i);
  return grid;
}

ResolventScan scan_resolvent(const OperatorSet& ops, const std::vector<double>& mu_grid,
                             const ScanOptions& options) {
  require(!mu_grid.empty(), "scan_resolvent: empty grid");
  for (double mu : mu_grid) require(std::isfinite(mu), "scan_resolvent: grid values must be finite");
  {
    std::vector<double> sorted = mu_grid;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "scan_resolvent: grid values must be distinct");
  }
  const double h = ops.mesh ? ops.mesh->h : 0.0;
  const NormEvaluator evaluate(ops, options.norm);

  ResolventScan scan;
  scan.mu_values = mu_grid;
  scan.norms.assign(mu_grid.size(), kNaN);
  scan.flags.assign(mu_grid.size(), "ok");
  parallel_for(mu_grid.size(), options.jobs, [&](std::size_t i) {
    const double mu = mu_grid[i];
    const NormResult r = evaluate(mu);
    scan.norms[i] = r.norm;
    if (r.singular)
      scan.flags[i] = "singular";
    else if (std::abs(mu) * h > options.resolution_limit)
      scan.flags[i] = "underresolved";
  });

  std::vector<double> xs, ys, lx, ly;
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    if (scan.flags[i] != "ok") continue;
    const double ax = std::abs(mu_grid[i]);
    xs.push_back(ax);
    ys.push_back(std::log(scan.norms[i]));
    if (ax >= 1.0) {
      lx.push_back(std::log(ax));
      ly.push_back(std::log(scan.norms[i]));
    }
  }
  scan.fitted = xs.size();
  if (xs.empty()) {
    scan.C1 = scan.C2 = kNaN;
    scan.growth_exponent = kNaN;
    return scan;
  }
  const Envelope env = fit_envelope(xs, ys);
  scan.C1 = env.C1;
  scan.C2 = env.C2;
  scan.degenerate = env.degenerate;
  scan.covered = std::isfinite(env.C1) && std::isfinite(env.C2);
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (ys[i] > env.C1 + env.C2 * xs[i]) scan.covered = false;

  scan.growth_exponent = kNaN;
  if (lx.size() >= 2) {
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / n;
      my += ly[i] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx > 0.0) scan.growth_exponent = sxy / sxx;
  }
  return scan;
}

void write_resolvent_csv(std::ostream& os, const ResolventScan& scan) {
  std::ostringstream buf;
  buf << "mu,norm,flag\n";
  for (std::size_t i = 0; i < scan.mu_values.size(); ++i)
    buf << fmt17(scan.mu_values[i]) << ',' << fmt17(scan.norms[i]) << ',' << scan.flags[i] << '\n';
  os << buf.str();
}

ResolventSolution monolithic_resolvent_solve(const OperatorSet& ops, double mu, const CVec& f,
                                             const CVec& g) {
  require(f.size() == ops.n_dof && g.size() == ops.n_dof, "monolithic_resolvent_solve: data dimension mismatch");
  require(std::isfinite(mu), "monolithic_resolvent_solve: mu must be finite");
  const cplx i_mu(0.0, mu);
  ResolventSolution out;
  out.z = CState::zero(ops.n_dof);
  const CVec rhs = -(ops.M * g) - i_mu * (ops.M * f) - ops.D * f;
  if (rhs.norm() == 0.0 && f.norm() == 0.0) return out;

  const CSpMat q = shifted_pencil(ops, mu);
  ComplexLU lu;
  lu.compute(q);
  if (lu.info() != Eigen::Success) {
    out.near_singular = true;
    out.z.u.setConstant(cplx(kNaN, kNaN));
    out.z.v.setConstant(cplx(kNaN, kNaN));
    out.residual = kInf;
    return out;
  }
  out.z.u = lu.solve(rhs);
  out.z.v = i_mu * out.z.u + f;

  double qnorm = 0.0;
  for (int c = 0; c < q.outerSize(); ++c) {
    double s = 0.0;
    for (CSpMat::InnerIterator it(q, c); it; ++it) s += std::abs(it.value());
    qnorm = std::max(qnorm, s);
  }
  const double denom = qnorm * out.z.u.norm() + rhs.norm();
  out.residual = denom > 0.0 ? (q * out.z.u - rhs).norm() / denom : 0.0;
  const double data_norm = energy_norm(ops, CState{f, g});
  const double gain = data_norm > 0.0 ? energy_norm(ops, out.z) / data_norm : 0.0;
  out.near_singular = !out.z.u.allFinite() || out.residual > 1e-10 || gain > 1e10;  // ten digits lost
  return out;
}

double dissipation_ratio(const OperatorSet& ops, double mu, const CVec& f, const CVec& g, const CVec& u) {
  const double num = std::abs(mu) * std::real(u.dot(ops.D * u));
  const double den = mu * mu * std::real(f.dot(ops.K * f)) + std::real(g.dot(ops.M * g));
  require(den > 0.0, "dissipation_ratio: zero data");
  return num / den;
}

CState random_rhs(const OperatorSet& ops, double mu, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  CState z = CState::zero(ops.n_dof);
  for (Index i = 0; i < ops.n_dof; ++i) z.u[i] = cplx(normal(rng), normal(rng));
  for (Index i = 0; i < ops.n_dof; ++i) z.v[i] = cplx(normal(rng), normal(rng));
  const double w = mu != 0.0 ? mu * mu : 1.0;
  const double nrm = std::sqrt(w * std::real(z.u.dot(ops.K * z.u)) + std::real(z.v.dot(ops.M * z.v)));
  z.u /= nrm;
  z.v /= nrm;
  return z;
}

DissipationStudy interface_dissipation_study(const OperatorSet& ops, const std::vector<double>& mu_grid,
                                             int samples_per_mu, std::uint64_t seed, unsigned jobs) {
  require(!mu_grid.empty(), "interface_dissipation_study: empty grid");
  require(samples_per_mu >= 0, "interface_dissipation_study: negative sample count");
  for (double mu : mu_grid) require(mu != 0.0 && std::isfinite(mu), "interface_dissipation_study: mu must be nonzero");
  const Index n = ops.n_dof;
  const auto count = static_cast<std::size_t>(samples_per_mu);

  DissipationStudy study;
  study.mu_values = mu_grid;
  study.sup_ratio.assign(mu_grid.size(), 0.0);
  study.sample_mu.assign(mu_grid.size() * count, 0.0);
  study.sample_ratio.assign(mu_grid.size() * count, 0.0);

  const Mat kd = Mat(ops.K), md = Mat(ops.M), dd = Mat(ops.D);
  parallel_for(mu_grid.size(), jobs, [&](std::size_t k) {
    const double mu = mu_grid[k];
    const cplx i_mu(0.0, mu);
    ComplexLU lu;
    lu.compute(shifted_pencil(ops, mu));
    if (lu.info() != Eigen::Success)
      throw NumericalError("interface_dissipation_study: singular pencil at mu = " + fmt17(mu));

    // u = W (f, g) with W = Q^{-1} [-i mu M - D, -M].
    CMat data(n, 2 * n);
    data.leftCols(n) = -i_mu * md.cast<cplx>() - dd.cast<cplx>();
    data.rightCols(n) = -md.cast<cplx>();
    const CMat w = lu.solve(data);
    CMat num = std::abs(mu) * (w.adjoint() * dd.cast<cplx>() * w);
    num = 0.5 * (num + CMat(num.adjoint()));
    CMat den = CMat::Zero(2 * n, 2 * n);
    den.topLeftCorner(n, n) = (mu * mu) * kd.cast<cplx>();
    den.bottomRightCorner(n, n) = md.cast<cplx>();
    const Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(num, den, Eigen::EigenvaluesOnly);
    if (ges.info() != Eigen::Success)
      throw NumericalError("interface_dissipation_study: eigensolve failed at mu = " + fmt17(mu));
    study.sup_ratio[k] = ges.eigenvalues().maxCoeff();

    for (std::size_t s = 0; s < count; ++s) {
      const CState rhs = random_rhs(ops, mu, seed + 1000003ULL * k + s);
      const CVec u = lu.solve(CVec(-(ops.M * rhs.v) - i_mu * (ops.M * rhs.u) - ops.D * rhs.u));
      study.sample_mu[k * count + s] = mu;
      study.sample_ratio[k * count + s] = dissipation_ratio(ops, mu, rhs.u, rhs.v, u);
    }
  });

  study.C_fit = *std::max_element(study.sup_ratio.begin(), study.sup_ratio.end());
  study.max_sample_ratio =
      study.sample_ratio.empty() ? 0.0 : *std::max_element(study.sample_ratio.begin(), study.sample_ratio.end());
  study.covered = study.max_sample_ratio <= study.C_fit * (1.0 + 1e-10);
  return study;
}

}  // namespace kvwave
