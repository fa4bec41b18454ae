#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kvwave/assembly.hpp"

namespace kvwave {

enum class NormMethod { Auto, Dense, Iterative };

struct ResolventOptions {
  NormMethod method = NormMethod::Auto;
  Index dense_limit = 300;       ///< Auto uses the dense SVD up to this many dofs
  double singular_tol = 1e-13;   ///< sigma_min / ||T - i mu|| below this is a hit
  int max_iter = 200;
  double rel_tol = 1e-10;
};

struct NormResult {
  double norm = 0.0;       ///< +inf when `singular`
  double sigma_min = 0.0;
  double scale = 0.0;      ///< estimate of ||T - i mu|| used for the singular test
  bool singular = false;
  bool dense = false;
};

/// ||(A_h - i mu)^{-1}|| in the energy norm, i.e. 1 / sigma_min of the
/// generator written in coordinates (Lk^T u, Lm^T v).
NormResult resolvent_norm(const OperatorSet& ops, double mu, const ResolventOptions& options = {});

struct Envelope {
  double C1 = 0.0;
  double C2 = 0.0;
  bool degenerate = false;  ///< fewer than two distinct abscissae; C2 = 0
};

/// Least-squares line C1 + C2 x lying on or above every (x_i, y_i).
Envelope fit_envelope(const std::vector<double>& x, const std::vector<double>& y);

struct ScanOptions {
  ResolventOptions norm;
  unsigned jobs = 1;
  double resolution_limit = 0.6;  ///< samples with |mu| h above this are flagged
};

struct ResolventScan {
  std::vector<double> mu_values;
  std::vector<double> norms;
  std::vector<std::string> flags;  ///< ok, singular or underresolved
  double C1 = 0.0;
  double C2 = 0.0;
  bool degenerate = false;
  double growth_exponent = 0.0;  ///< log-log slope over |mu| >= 1; NaN when undefined
  bool covered = false;          ///< every fitted sample lies under the envelope
  std::size_t fitted = 0;
};

ResolventScan scan_resolvent(const OperatorSet& ops, const std::vector<double>& mu_grid,
                             const ScanOptions& options = {});

/// Default grid 0, 0.5, ..., 60.
std::vector<double> default_mu_grid();

/// CSV `mu,norm,flag`.
void write_resolvent_csv(std::ostream& os, const ResolventScan& scan);

struct ResolventSolution {
  CState z;
  double residual = 0.0;  ///< relative residual of the eliminated system
  bool near_singular = false;
};

/// Solves (A_h - i mu)(u, v) = (f, g) by eliminating v = i mu u + f:
/// (K + i mu D - mu^2 M) u = -M g - i mu M f - D f.
ResolventSolution monolithic_resolvent_solve(const OperatorSet& ops, double mu, const CVec& f,
                                             const CVec& g);

/// |mu| u^H D u / (mu^2 f^H K f + g^H M g); D already carries the factor d.
double dissipation_ratio(const OperatorSet& ops, double mu, const CVec& f, const CVec& g,
                         const CVec& u);

struct DissipationStudy {
  std::vector<double> mu_values;
  std::vector<double> sup_ratio;  ///< exact supremum over (f, g) at each mu
  double C_fit = 0.0;             ///< max of sup_ratio
  std::vector<double> sample_mu;
  std::vector<double> sample_ratio;
  double max_sample_ratio = 0.0;
  bool covered = false;  ///< every random sample satisfies ratio <= C_fit
};

/// Exact per-mu supremum of the dissipation ratio (Hermitian generalized
/// eigenproblem) plus `samples_per_mu` random right-hand sides per mu.
DissipationStudy interface_dissipation_study(const OperatorSet& ops, const std::vector<double>& mu_grid,
                                             int samples_per_mu, std::uint64_t seed, unsigned jobs = 1);

/// Random complex data (f, g) with mu^2 f^H K f + g^H M g = 1; for mu = 0 the
/// energy norm f^H K f + g^H M g is normalized instead.
CState random_rhs(const OperatorSet& ops, double mu, std::uint64_t seed);

}  // namespace kvwave
