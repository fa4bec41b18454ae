#include "kvwave/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "kvwave/dense.hpp"
#include "kvwave/io.hpp"

namespace kvwave {

namespace {

double norm1(const SpMat& a) {
  double best = 0.0;
  for (int c = 0; c < a.outerSize(); ++c) {
    double s = 0.0;
    for (SpMat::InnerIterator it(a, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

double modal_frequency(const OperatorSet& ops, const CVec& x) {
  const double kx = std::real(x.dot(ops.K.cast<cplx>() * x));
  const double mx = std::real(x.dot(ops.M.cast<cplx>() * x));
  return mx > 0.0 ? std::sqrt(std::max(kx, 0.0) / mx) : 0.0;
}

void finish_spectrum(const OperatorSet& ops, const CVec& values, const CMat& u_parts, Spectrum& out) {
  const Index m = values.size();
  out.eigenvalues = values;
  out.residuals.resize(m);
  out.modal_frequency.resize(m);
  out.trusted.assign(m, false);
  for (Index j = 0; j < m; ++j) {
    const CVec x = u_parts.col(j);
    out.residuals[j] = pencil_residual(ops, values[j], x);
    out.trusted[j] = std::isfinite(out.residuals[j]) && out.residuals[j] <= out.trust_tol;
    out.modal_frequency[j] = modal_frequency(ops, x);
  }
  out.n_dof = ops.n_dof;
  out.dim = ops.mesh ? ops.mesh->dim : 0;
  out.d = ops.d;
}

}  // namespace

Index Spectrum::trusted_count() const {
  return static_cast<Index>(std::count(trusted.begin(), trusted.end(), true));
}

double pencil_residual(const OperatorSet& ops, cplx lambda, const CVec& x) {
  const CVec r = (lambda * lambda) * (ops.M.cast<cplx>() * x) + lambda * (ops.D.cast<cplx>() * x) +
                 ops.K.cast<cplx>() * x;
  const double a = std::abs(lambda);
  const double scale = (norm1(ops.K) + a * norm1(ops.D) + a * a * norm1(ops.M)) * x.norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

Spectrum solve_qep(const OperatorSet& ops, const QepOptions& options) {
  const Index n = ops.n_dof;
  if (n > options.max_dof)
    throw InvalidArgument("solve_qep: n_dof = " + std::to_string(n) + " exceeds the dense limit " +
                          std::to_string(options.max_dof));
  const Mat kd = Mat(ops.K), md = Mat(ops.M), dd = Mat(ops.D);
  Spectrum out;
  out.trust_tol = options.trust_tol;
  dense::EigenPairs pairs;
  if (options.method == QepMethod::QZ) {
    Mat a = Mat::Zero(2 * n, 2 * n), b = Mat::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n).setIdentity();
    a.bottomLeftCorner(n, n) = -kd;
    a.bottomRightCorner(n, n) = -dd;
    b.topLeftCorner(n, n).setIdentity();
    b.bottomRightCorner(n, n) = md;
    pairs = dense::eig(a, b);
  } else {
    // With M = L L^T and w = L^T v the pencil becomes the standard matrix
    // [[0, L^{-T}], [-L^{-1} K, -L^{-1} D L^{-T}]] acting on (u, w).
    const Eigen::LLT<Mat> llt(md);
    if (llt.info() != Eigen::Success) throw NumericalError("solve_qep: mass matrix not positive definite");
    const auto l = llt.matrixL();
    Mat lit = Mat::Identity(n, n);
    l.transpose().solveInPlace(lit);  // L^{-T}
    Mat lik = kd;
    l.solveInPlace(lik);  // L^{-1} K
    Mat lid = dd;
    l.solveInPlace(lid);
    Mat c = Mat::Zero(2 * n, 2 * n);
    c.topRightCorner(n, n) = lit;
    c.bottomLeftCorner(n, n) = -lik;
    c.bottomRightCorner(n, n) = -(lid * lit);
    pairs = dense::eig(c);
  }
  finish_spectrum(ops, pairs.values, pairs.vectors.topRows(n), out);
  return out;
}

Spectrum solve_qep_near(const OperatorSet& ops, cplx target, int count, const NearOptions& options) {
  require(count >= 1, "solve_qep_near: count must be positive");
  const Index n = ops.n_dof;
  const Index dim2 = 2 * n;
  const int m = static_cast<int>(std::min<Index>(
      dim2, options.krylov_dim > 0 ? options.krylov_dim : std::max(3 * count, count + 30)));
  require(count <= m, "solve_qep_near: count exceeds the Krylov dimension");

  const CSpMat mc = ops.M.cast<cplx>(), dc = ops.D.cast<cplx>(), kc = ops.K.cast<cplx>();
  CSpMat q = kc + target * dc + (target * target) * mc;
  q.makeCompressed();
  Eigen::SparseLU<CSpMat> lu;
  lu.compute(q);
  if (lu.info() != Eigen::Success)
    throw NumericalError("solve_qep_near: shift lies on an eigenvalue (singular K + sD + s^2 M)");

  // x -> (A - sigma B)^{-1} B x on the companion coordinates (u, v).
  const auto apply = [&](const CVec& x) {
    const CVec x1 = x.head(n), x2 = x.tail(n);
    const CVec rhs = mc * x2 + dc * x1 + target * (mc * x1);
    const CVec y1 = -lu.solve(rhs);
    CVec y(dim2);
    y.head(n) = y1;
    y.tail(n) = x1 + target * y1;
    return y;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  CMat v = CMat::Zero(dim2, m + 1);
  CMat h = CMat::Zero(m + 1, m);
  CVec start(dim2);
  for (Index i = 0; i < dim2; ++i) start[i] = cplx(normal(rng), normal(rng));
  v.col(0) = start / start.norm();
  int steps = m;
  for (int j = 0; j < m; ++j) {
    CVec w = apply(v.col(j));
    for (int pass = 0; pass < 2; ++pass) {  // classical Gram-Schmidt, twice
      const CVec c = v.leftCols(j + 1).adjoint() * w;
      w -= v.leftCols(j + 1) * c;
      h.block(0, j, j + 1, 1) += c;
    }
    const double beta = w.norm();
    h(j + 1, j) = beta;
    if (beta < 1e-14) {
      steps = j + 1;
      break;
    }
    v.col(j + 1) = w / beta;
  }

  const CMat hm = h.topLeftCorner(steps, steps);
  Eigen::ComplexEigenSolver<CMat> ces(hm);
  if (ces.info() != Eigen::Success) throw NumericalError("solve_qep_near: Ritz eigensolve failed");
  std::vector<int> order(steps);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(ces.eigenvalues()[a]) > std::abs(ces.eigenvalues()[b]);
  });
  const int keep = std::min(count, steps);
  CVec values(keep);
  CMat u_parts(n, keep);
  for (int i = 0; i < keep; ++i) {
    const cplx theta = ces.eigenvalues()[order[i]];
    values[i] = target + 1.0 / theta;
    const CVec x = v.leftCols(steps) * ces.eigenvectors().col(order[i]);
    u_parts.col(i) = x.head(n);
  }
  Spectrum out;
  out.trust_tol = options.trust_tol;
  finish_spectrum(ops, values, u_parts, out);
  return out;
}

double conjugate_gap(const Spectrum& spec) {
  double worst = 0.0;
  const Index m = spec.size();
  for (Index i = 0; i < m; ++i) {
    const cplx c = std::conj(spec.eigenvalues[i]);
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) best = std::min(best, std::abs(spec.eigenvalues[j] - c));
    worst = std::max(worst, best);
  }
  return worst;
}

BandReport band_abscissa(const Spectrum& spec, int j_max, const BandOptions& options) {
  require(spec.size() > 0, "band_abscissa: empty spectrum");
  require(j_max >= 0, "band_abscissa: j_max must be nonnegative");
  BandReport report;
  double top = 0.0;
  for (Index i = 0; i < spec.size(); ++i)
    if (spec.trusted[i]) top = std::max(top, spec.modal_frequency[i]);
  report.frequency_cutoff = (1.0 - options.exclude_top_fraction) * top;

  for (int j = 0; j <= j_max; ++j) {
    Band band;
    band.j = j;
    band.lo = std::ldexp(1.0, j);
    band.hi = std::ldexp(1.0, j + 1);
    for (Index i = 0; i < spec.size(); ++i) {
      const double f = spec.modal_frequency[i];
      if (!spec.trusted[i] || f < band.lo || f >= band.hi || f > report.frequency_cutoff) continue;
      ++band.count;
      const double re = spec.eigenvalues[i].real();
      band.abscissa = band.abscissa ? std::max(*band.abscissa, re) : re;
    }
    report.bands.push_back(band);
  }

  std::vector<double> tail;
  for (const auto& b : report.bands)
    if (b.abscissa) tail.push_back(*b.abscissa);
  if (tail.size() >= 3) {
    const double a0 = tail[tail.size() - 3], a1 = tail[tail.size() - 2], a2 = tail.back();
    const bool increasing = a0 < a1 && a1 < a2;
    const bool approaching_zero = std::abs(a2) <= (1.0 - options.min_contraction) * std::abs(a0);
    report.trend = increasing && approaching_zero;
  }
  return report;
}

StabilityReport verify_strong_stability(const Spectrum& spec, double tol) {
  StabilityReport report;
  report.tol = tol;
  report.max_real = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Index i = 0; i < spec.size(); ++i) {
    if (!spec.trusted[i]) continue;
    any = true;
    const cplx lam = spec.eigenvalues[i];
    report.max_real = std::max(report.max_real, lam.real());
    if (!(lam.real() < -tol * (1.0 + std::abs(lam)))) report.offenders.push_back(i);
  }
  report.no_data = !any;
  if (!any) report.max_real = 0.0;
  report.pass = report.offenders.empty();
  return report;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec) {
  std::ostringstream buf;
  buf << "re,im,residual,trusted\n";
  for (Index i = 0; i < spec.size(); ++i) {
    buf << fmt17(spec.eigenvalues[i].real()) << ',' << fmt17(spec.eigenvalues[i].imag()) << ','
        << fmt17(spec.residuals[i]) << ',' << (spec.trusted[i] ? 1 : 0) << '\n';
  }
  os << buf.str();
}

}  // namespace kvwave
