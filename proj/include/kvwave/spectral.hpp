#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kvwave/assembly.hpp"

namespace kvwave {

/// Eigenvalues of the quadratic pencil lambda^2 M + lambda D + K.
struct Spectrum {
  CVec eigenvalues;
  Vec residuals;              ///< scaled pencil residual per eigenpair
  std::vector<bool> trusted;  ///< residual <= trust_tol
  /// sqrt(x^H K x / x^H M x) of the displacement part of each eigenvector.
  /// Equals |Im lambda| for undamped modes and also labels overdamped ones.
  Vec modal_frequency;
  double trust_tol = 1e-6;

  Index n_dof = 0;
  int dim = 0;
  double d = 0.0;

  [[nodiscard]] Index size() const { return eigenvalues.size(); }
  [[nodiscard]] Index trusted_count() const;
};

enum class QepMethod {
  CholeskyReduced,  ///< standard eigenproblem after the congruence with chol(M)
  QZ,               ///< generalized solve on the companion pencil
};

struct QepOptions {
  QepMethod method = QepMethod::CholeskyReduced;
  double trust_tol = 1e-6;
  Index max_dof = 2000;
};

/// Dense solve of the companion linearization
///   [[0, I], [-K, -D]] x = lambda [[I, 0], [0, M]] x,
/// returning all 2 n_dof eigenvalues with residuals checked on the pencil.
Spectrum solve_qep(const OperatorSet& ops, const QepOptions& options = {});

struct NearOptions {
  int krylov_dim = 0;  ///< 0 selects max(3 count, count + 30)
  double trust_tol = 1e-6;
  std::uint64_t seed = 7;
};

/// `count` eigenvalues closest to `target` by shift-invert Arnoldi on the
/// companion pencil; one sparse LU of K + sigma D + sigma^2 M.
Spectrum solve_qep_near(const OperatorSet& ops, cplx target, int count, const NearOptions& options = {});

/// ||(lambda^2 M + lambda D + K) x|| / ((||K|| + |lambda| ||D|| + |lambda|^2 ||M||) ||x||).
double pencil_residual(const OperatorSet& ops, cplx lambda, const CVec& x);

/// Largest distance from an eigenvalue to the nearest conjugate of another.
double conjugate_gap(const Spectrum& spec);

struct Band {
  int j = 0;
  double lo = 0.0;  ///< 2^j
  double hi = 0.0;  ///< 2^(j+1)
  Index count = 0;
  std::optional<double> abscissa;  ///< max Re(lambda); empty band has none
};

struct BandOptions {
  double exclude_top_fraction = 0.2;  ///< drop the top 20% of the frequency range
  double min_contraction = 0.1;       ///< required relative approach to 0 for a trend
};

struct BandReport {
  std::vector<Band> bands;
  double frequency_cutoff = 0.0;
  bool trend = false;
};

/// Per-dyadic-band spectral abscissa over trusted eigenpairs keyed by modal
/// frequency. `trend` holds when the last three non-empty bands increase
/// strictly and the last one is closer to 0 than the first by at least
/// `min_contraction` relative.
BandReport band_abscissa(const Spectrum& spec, int j_max, const BandOptions& options = {});

struct StabilityReport {
  bool pass = true;
  bool no_data = false;
  double tol = 0.0;
  double max_real = 0.0;
  std::vector<Index> offenders;  ///< indices with Re(lambda) >= -tol (1 + |lambda|)
};

StabilityReport verify_strong_stability(const Spectrum& spec, double tol);

/// CSV `re,im,residual,trusted`.
void write_spectrum_csv(std::ostream& os, const Spectrum& spec);

}  // namespace kvwave
