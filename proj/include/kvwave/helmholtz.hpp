#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kvwave/geometry.hpp"

namespace kvwave {

/// Elements of `region` as a standalone mesh. Nodes are renumbered; the
/// boundary is every node on the boundary of the region.
Mesh extract_subdomain(const Mesh& mesh, Region region = Region::Damped);

struct HelmholtzOptions {
  double d = 1.0;
  int trials = 100;
  std::uint64_t seed = 1;
  double mu0 = 10.0;           ///< smallest admissible |mu|
  bool boundary_data = true;   ///< random Dirichlet data on the subdomain boundary
  bool forcing = true;         ///< random F scaled by 10^U(-3, 0)
};

struct HelmholtzResult {
  double mu = 0.0;
  double max_ratio = 0.0;
  std::vector<double> ratios;  ///< one per trial that was not skipped
  int skipped = 0;             ///< trials with zero data
};

/// Solves Laplace(w) + mu^2 / (1 + i d mu) w = F weakly on `sub` for random
/// data and records (||w||^2 + ||grad w||^2) / (||grad w||^2 + ||F||^2).
HelmholtzResult helmholtz_h1_check(const Mesh& sub, double mu, const HelmholtzOptions& options = {});

struct HelmholtzStudyOptions {
  HelmholtzOptions trial;
  std::vector<double> mu_values{10.0, 20.0, 40.0};
  std::vector<Index> resolutions;  ///< cells per unit length, coarse to fine
  double band = 0.2;               ///< allowed relative deviation
  unsigned jobs = 1;
};

struct HelmholtzStudy {
  std::vector<double> mu_values;
  std::vector<Index> resolutions;
  std::vector<std::vector<double>> max_ratio;  ///< [resolution][mu]
  double mesh_deviation = 0.0;  ///< max |r / r_coarsest - 1| over mu
  double mu_deviation = 0.0;    ///< max |r / r_first_mu - 1| over meshes
  double mu_growth = 0.0;       ///< max r(mu_{j+1}) / r(mu_j)
  bool mesh_stable = false;
  bool mu_stable = false;
  bool mu_uniform = false;  ///< mu_growth <= 1 + band
};

/// Runs helmholtz_h1_check over every (resolution, mu) pair. `build` maps a
/// resolution to the full mesh whose damped region is the subdomain.
HelmholtzStudy helmholtz_study(const std::function<Mesh(Index)>& build, const HelmholtzStudyOptions& options);

}  // namespace kvwave
