#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "kvwave/common.hpp"

namespace kvwave {

enum class Region : std::uint8_t { Elastic, Damped };

/// Damped interval (a, b) inside the unit interval.
struct IntervalOmega {
  double a = 0.0;
  double b = 0.0;
};

/// Damped axis-aligned rectangle [x0, x1] x [y0, y1] inside the unit square.
struct RectOmega {
  double x0 = 0.0;
  double x1 = 0.0;
  double y0 = 0.0;
  double y1 = 0.0;
};

using OmegaDescriptor = std::variant<IntervalOmega, RectOmega>;

/// Indicator damping a(x) = d * 1_omega(x).
struct DampingField {
  double d = 0.0;
  OmegaDescriptor omega;
};

/// Facet of the interface between damped and elastic elements. In 1D a facet
/// is a single node and `b` equals `a`.
struct Facet {
  Index a = -1;
  Index b = -1;
};

/// Interface-aligned simplicial mesh of the unit interval or unit square.
///
/// Elements store `dim + 1` node indices; the unused slot of a 1D element is
/// -1. Every element lies entirely inside or entirely outside the damped
/// region, so the jump of the damping coefficient sits exactly on element
/// facets.
struct Mesh {
  int dim = 1;
  std::vector<std::array<double, 2>> nodes;
  std::vector<std::array<Index, 3>> elements;
  std::vector<Region> element_region;
  std::vector<Index> boundary_nodes;
  std::vector<Facet> interface_facets;
  double h = 0.0;

  [[nodiscard]] int nodes_per_element() const { return dim + 1; }
  [[nodiscard]] Index num_nodes() const { return static_cast<Index>(nodes.size()); }
  [[nodiscard]] Index num_elements() const { return static_cast<Index>(elements.size()); }

  /// Element length (1D) or area (2D).
  [[nodiscard]] double element_measure(Index e) const;
  /// Element midpoint (1D) or centroid (2D).
  [[nodiscard]] std::array<double, 2> element_center(Index e) const;
  [[nodiscard]] Index count_region(Region r) const;
  [[nodiscard]] double region_measure(Region r) const;
  /// Nodes shared by at least one damped and one elastic element, sorted.
  [[nodiscard]] std::vector<Index> interface_nodes() const;
  /// Per-node flag: node belongs to some element of region `r`.
  [[nodiscard]] std::vector<bool> nodes_touching(Region r) const;
  [[nodiscard]] std::vector<bool> boundary_mask() const;
};

enum class Interiority {
  Strict,   ///< closure(omega) must not meet the outer boundary.
  Relaxed,  ///< test-only: omega may touch or fill the domain.
};

Mesh build_interval_mesh(Index n_cells, IntervalOmega omega,
                         Interiority check = Interiority::Strict);

Mesh build_square_mesh(Index n, RectOmega omega,
                       Interiority check = Interiority::Strict);

/// True when `p` lies strictly inside the descriptor.
bool omega_contains(const OmegaDescriptor& omega, const std::array<double, 2>& p);

int omega_dim(const OmegaDescriptor& omega);

/// Measure of the damped region described by `omega`.
double omega_measure(const OmegaDescriptor& omega);

/// Plain-text listing, one record per line: `node`, `element`, `boundary`,
/// `interface` records preceded by a `mesh` header.
void write_mesh_dump(std::ostream& os, const Mesh& mesh);

}  // namespace kvwave
