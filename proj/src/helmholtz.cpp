#include "kvwave/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseLU>

#include "kvwave/assembly.hpp"
#include "kvwave/parallel.hpp"

namespace kvwave {

Mesh extract_subdomain(const Mesh& mesh, Region region) {
  const auto outer = mesh.boundary_mask();
  const auto inside = mesh.nodes_touching(region);
  const Region other = region == Region::Damped ? Region::Elastic : Region::Damped;
  const auto outside = mesh.nodes_touching(other);

  Mesh sub;
  sub.dim = mesh.dim;
  sub.h = mesh.h;
  std::vector<Index> renumber(mesh.num_nodes(), -1);
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    if (!inside[i]) continue;
    renumber[i] = sub.num_nodes();
    sub.nodes.push_back(mesh.nodes[i]);
    if (outer[i] || outside[i]) sub.boundary_nodes.push_back(renumber[i]);
  }
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.element_region[e] != region) continue;
    std::array<Index, 3> el{-1, -1, -1};
    for (int k = 0; k < mesh.nodes_per_element(); ++k) el[k] = renumber[mesh.elements[e][k]];
    sub.elements.push_back(el);
    sub.element_region.push_back(Region::Damped);
  }
  require(!sub.elements.empty(), "extract_subdomain: region has no elements");
  return sub;
}

HelmholtzResult helmholtz_h1_check(const Mesh& sub, double mu, const HelmholtzOptions& options) {
  require(std::abs(mu) >= options.mu0, "helmholtz_h1_check: |mu| must be at least mu0");
  require(options.trials >= 1, "helmholtz_h1_check: trials must be positive");
  const Index nn = sub.num_nodes();
  const RegionMatrices rm = assemble_region(sub, Region::Damped);
  const CSpMat kc = rm.K.cast<cplx>(), mc = rm.M.cast<cplx>();
  const cplx wave = (mu * mu) / (1.0 + cplx(0.0, options.d * mu));

  const auto on_boundary = sub.boundary_mask();
  std::vector<Index> free_index(nn, -1);
  Index nfree = 0;
  for (Index i = 0; i < nn; ++i)
    if (!on_boundary[i]) free_index[i] = nfree++;

  // Weak form of Laplace(w) + wave w = F: (-K + wave M) w = M F.
  const CSpMat a = -kc + wave * mc;
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int c = 0; c < a.outerSize(); ++c)
    for (CSpMat::InnerIterator it(a, c); it; ++it)
      if (free_index[it.row()] >= 0 && free_index[it.col()] >= 0)
        trip.emplace_back(free_index[it.row()], free_index[it.col()], it.value());
  CSpMat aff(nfree, nfree);
  aff.setFromTriplets(trip.begin(), trip.end());
  aff.makeCompressed();
  Eigen::SparseLU<CSpMat> lu;
  if (nfree > 0) {
    lu.compute(aff);
    if (lu.info() != Eigen::Success) throw NumericalError("helmholtz_h1_check: singular Helmholtz system");
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> exponent(-3.0, 0.0);
  HelmholtzResult result;
  result.mu = mu;
  for (int t = 0; t < options.trials; ++t) {
    CVec forcing = CVec::Zero(nn), w = CVec::Zero(nn);
    if (options.forcing) {
      const double scale = std::pow(10.0, exponent(rng));
      for (Index i = 0; i < nn; ++i) forcing[i] = scale * cplx(normal(rng), normal(rng));
    }
    if (options.boundary_data)
      for (Index i = 0; i < nn; ++i)
        if (on_boundary[i]) w[i] = cplx(normal(rng), normal(rng));
    if (forcing.isZero(0.0) && w.isZero(0.0)) {
      ++result.skipped;
      continue;
    }
    if (nfree > 0) {
      const CVec full = mc * forcing - a * w;
      CVec rhs(nfree);
      for (Index i = 0; i < nn; ++i)
        if (free_index[i] >= 0) rhs[free_index[i]] = full[i];
      const CVec x = lu.solve(rhs);
      for (Index i = 0; i < nn; ++i)
        if (free_index[i] >= 0) w[i] = x[free_index[i]];
    }
    const double mass_w = std::real(w.dot(mc * w));
    const double grad_w = std::real(w.dot(kc * w));
    const double mass_f = std::real(forcing.dot(mc * forcing));
    const double den = grad_w + mass_f;
    if (!(den > 0.0)) {
      ++result.skipped;
      continue;
    }
    result.ratios.push_back((mass_w + grad_w) / den);
  }
  if (!result.ratios.empty()) result.max_ratio = *std::max_element(result.ratios.begin(), result.ratios.end());
  return result;
}

HelmholtzStudy helmholtz_study(const std::function<Mesh(Index)>& build, const HelmholtzStudyOptions& options) {
  require(!options.mu_values.empty(), "helmholtz_study: no mu values");
  require(!options.resolutions.empty(), "helmholtz_study: no resolutions");
  HelmholtzStudy study;
  study.mu_values = options.mu_values;
  study.resolutions = options.resolutions;
  const std::size_t nr = options.resolutions.size(), nm = options.mu_values.size();
  study.max_ratio.assign(nr, std::vector<double>(nm, 0.0));

  std::vector<Mesh> subs;
  subs.reserve(nr);
  for (Index res : options.resolutions) subs.push_back(extract_subdomain(build(res)));
  parallel_for(nr * nm, options.jobs, [&](std::size_t k) {
    const std::size_t r = k / nm, m = k % nm;
    study.max_ratio[r][m] = helmholtz_h1_check(subs[r], options.mu_values[m], options.trial).max_ratio;
  });

  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t m = 0; m < nm; ++m) {
      const double v = study.max_ratio[r][m];
      study.mesh_deviation = std::max(study.mesh_deviation, std::abs(v / study.max_ratio[0][m] - 1.0));
      study.mu_deviation = std::max(study.mu_deviation, std::abs(v / study.max_ratio[r][0] - 1.0));
      if (m > 0) study.mu_growth = std::max(study.mu_growth, v / study.max_ratio[r][m - 1]);
    }
  }
  study.mesh_stable = study.mesh_deviation <= options.band;
  study.mu_stable = study.mu_deviation <= options.band;
  study.mu_uniform = nm < 2 || study.mu_growth <= 1.0 + options.band;
  return study;
}

}  // namespace kvwave
