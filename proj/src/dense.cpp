#include "kvwave/dense.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <lapacke.h>

namespace kvwave::dense {

namespace {

// xGEEV/xGGEV store a complex-conjugate pair in two consecutive real columns.
CMat unpack_real_vectors(const Mat& vr, const Vec& alphai) {
  const Index n = vr.rows();
  CMat out(n, vr.cols());
  for (Index j = 0; j < vr.cols(); ++j) {
    if (alphai[j] == 0.0) {
      out.col(j) = vr.col(j).cast<cplx>();
    } else if (alphai[j] > 0.0 && j + 1 < vr.cols()) {
      for (Index i = 0; i < n; ++i) {
        out(i, j) = cplx(vr(i, j), vr(i, j + 1));
        out(i, j + 1) = cplx(vr(i, j), -vr(i, j + 1));
      }
      ++j;
    }
  }
  return out;
}

void check_info(lapack_int info, const char* routine) {
  if (info != 0)
    throw NumericalError(std::string(routine) + " failed with info = " + std::to_string(info));
}

}  // namespace

EigenPairs eig(const Mat& a) {
  require(a.rows() == a.cols(), "dense::eig: matrix must be square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat work = a;
  Vec wr(n), wi(n);
  Mat vr(n, n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(),
                                        wi.data(), nullptr, 1, vr.data(), n);
  check_info(info, "dgeev");
  EigenPairs out;
  out.values.resize(n);
  for (lapack_int i = 0; i < n; ++i) out.values[i] = cplx(wr[i], wi[i]);
  out.vectors = unpack_real_vectors(vr, wi);
  return out;
}

EigenPairs eig(const Mat& a, const Mat& b) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "dense::eig: pencil dimensions differ");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Mat wa = a, wb = b;
  Vec ar(n), ai(n), beta(n);
  Mat vr(n, n);
  const lapack_int info = LAPACKE_dggev(LAPACK_COL_MAJOR, 'N', 'V', n, wa.data(), n, wb.data(), n,
                                        ar.data(), ai.data(), beta.data(), nullptr, 1, vr.data(), n);
  check_info(info, "dggev");
  EigenPairs out;
  out.values.resize(n);
  for (lapack_int i = 0; i < n; ++i) {
    if (beta[i] == 0.0) throw NumericalError("dggev: infinite eigenvalue in a regular pencil");
    out.values[i] = cplx(ar[i], ai[i]) / beta[i];
  }
  out.vectors = unpack_real_vectors(vr, ai);
  return out;
}

Vec singular_values(const CMat& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  CMat work = a;
  Vec s(std::min(m, n));
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, reinterpret_cast<lapack_complex_double*>(work.data()),
                     m, s.data(), nullptr, 1, nullptr, 1);
  check_info(info, "zgesdd");
  return s;
}

}  // namespace kvwave::dense
