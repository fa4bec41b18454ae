#include "kvwave/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace kvwave {

namespace {

Index snap(double x, Index n) { return static_cast<Index>(std::llround(x * static_cast<double>(n))); }

void collect_interface_facets(Mesh& mesh) {
  mesh.interface_facets.clear();
  if (mesh.dim == 1) {
    for (Index node : mesh.interface_nodes()) mesh.interface_facets.push_back({node, node});
    return;
  }
  // Edge -> (damped count, elastic count).
  std::map<std::pair<Index, Index>, std::array<int, 2>> edges;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.elements[e];
    const int slot = mesh.element_region[e] == Region::Damped ? 0 : 1;
    for (int k = 0; k < 3; ++k) {
      Index p = el[k], q = el[(k + 1) % 3];
      if (p > q) std::swap(p, q);
      edges[{p, q}][slot] += 1;
    }
  }
  for (const auto& [edge, counts] : edges) {
    if (counts[0] > 0 && counts[1] > 0) mesh.interface_facets.push_back({edge.first, edge.second});
  }
}

void check_damped_interior(const Mesh& mesh) {
  const auto on_boundary = mesh.boundary_mask();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.element_region[e] != Region::Damped) continue;
    for (int k = 0; k < mesh.nodes_per_element(); ++k) {
      if (on_boundary[mesh.elements[e][k]])
        throw InvalidArgument("damped region touches the outer boundary");
    }
  }
}

}  // namespace

double Mesh::element_measure(Index e) const {
  const auto& el = elements[e];
  if (dim == 1) return std::abs(nodes[el[1]][0] - nodes[el[0]][0]);
  const auto& p = nodes[el[0]];
  const auto& q = nodes[el[1]];
  const auto& r = nodes[el[2]];
  return 0.5 * std::abs((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]));
}

std::array<double, 2> Mesh::element_center(Index e) const {
  const auto& el = elements[e];
  std::array<double, 2> c{0.0, 0.0};
  const int npe = nodes_per_element();
  for (int k = 0; k < npe; ++k) {
    c[0] += nodes[el[k]][0];
    c[1] += nodes[el[k]][1];
  }
  c[0] /= npe;
  c[1] /= npe;
  return c;
}

Index Mesh::count_region(Region r) const {
  return static_cast<Index>(std::count(element_region.begin(), element_region.end(), r));
}

double Mesh::region_measure(Region r) const {
  double m = 0.0;
  for (Index e = 0; e < num_elements(); ++e)
    if (element_region[e] == r) m += element_measure(e);
  return m;
}

std::vector<bool> Mesh::nodes_touching(Region r) const {
  std::vector<bool> mask(nodes.size(), false);
  for (Index e = 0; e < num_elements(); ++e) {
    if (element_region[e] != r) continue;
    for (int k = 0; k < nodes_per_element(); ++k) mask[elements[e][k]] = true;
  }
  return mask;
}

std::vector<Index> Mesh::interface_nodes() const {
  const auto damped = nodes_touching(Region::Damped);
  const auto elastic = nodes_touching(Region::Elastic);
  std::vector<Index> out;
  for (Index i = 0; i < num_nodes(); ++i)
    if (damped[i] && elastic[i]) out.push_back(i);
  return out;
}

std::vector<bool> Mesh::boundary_mask() const {
  std::vector<bool> mask(nodes.size(), false);
  for (Index i : boundary_nodes) mask[i] = true;
  return mask;
}

Mesh build_interval_mesh(Index n_cells, IntervalOmega omega, Interiority check) {
  require(n_cells >= 4, "build_interval_mesh: n_cells must be at least 4");
  require(omega.a < omega.b, "build_interval_mesh: need a < b");
  if (check == Interiority::Strict) {
    require(omega.a > 0.0 && omega.b < 1.0,
            "build_interval_mesh: omega must lie strictly inside (0,1)");
  } else {
    require(omega.a >= 0.0 && omega.b <= 1.0, "build_interval_mesh: omega outside [0,1]");
  }
  const Index ia = snap(omega.a, n_cells);
  const Index ib = snap(omega.b, n_cells);
  if (ia >= ib)
    throw InvalidArgument("build_interval_mesh: n_cells too small to separate a and b");
  if (check == Interiority::Strict && (ia <= 0 || ib >= n_cells))
    throw InvalidArgument("build_interval_mesh: n_cells too small, omega snaps onto the boundary");

  Mesh mesh;
  mesh.dim = 1;
  const double h = 1.0 / static_cast<double>(n_cells);
  mesh.nodes.resize(n_cells + 1);
  for (Index i = 0; i <= n_cells; ++i) mesh.nodes[i] = {static_cast<double>(i) * h, 0.0};
  mesh.elements.resize(n_cells);
  mesh.element_region.resize(n_cells);
  for (Index e = 0; e < n_cells; ++e) {
    mesh.elements[e] = {e, e + 1, -1};
    mesh.element_region[e] = (e >= ia && e < ib) ? Region::Damped : Region::Elastic;
  }
  mesh.boundary_nodes = {0, n_cells};
  mesh.h = h;
  collect_interface_facets(mesh);
  if (check == Interiority::Strict) check_damped_interior(mesh);
  return mesh;
}

Mesh build_square_mesh(Index n, RectOmega omega, Interiority check) {
  require(n >= 8, "build_square_mesh: n must be at least 8");
  require(omega.x0 < omega.x1 && omega.y0 < omega.y1, "build_square_mesh: empty omega");
  if (check == Interiority::Strict) {
    require(omega.x0 > 0.0 && omega.y0 > 0.0 && omega.x1 < 1.0 && omega.y1 < 1.0,
            "build_square_mesh: omega must lie strictly inside the unit square");
  }
  const Index ix0 = snap(omega.x0, n), ix1 = snap(omega.x1, n);
  const Index iy0 = snap(omega.y0, n), iy1 = snap(omega.y1, n);
  if (ix0 >= ix1 || iy0 >= iy1)
    throw InvalidArgument("build_square_mesh: n too small to resolve omega");
  if (check == Interiority::Strict && (ix0 <= 0 || iy0 <= 0 || ix1 >= n || iy1 >= n))
    throw InvalidArgument("build_square_mesh: omega snaps onto the boundary");

  Mesh mesh;
  mesh.dim = 2;
  const double h = 1.0 / static_cast<double>(n);
  const auto id = [n](Index i, Index j) { return j * (n + 1) + i; };
  mesh.nodes.resize((n + 1) * (n + 1));
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i) mesh.nodes[id(i, j)] = {i * h, j * h};

  mesh.elements.reserve(2 * n * n);
  mesh.element_region.reserve(2 * n * n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const bool inside = i >= ix0 && i < ix1 && j >= iy0 && j < iy1;
      const Region r = inside ? Region::Damped : Region::Elastic;
      mesh.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      mesh.element_region.push_back(r);
      mesh.element_region.push_back(r);
    }
  }
  for (Index j = 0; j <= n; ++j)
    for (Index i = 0; i <= n; ++i)
      if (i == 0 || j == 0 || i == n || j == n) mesh.boundary_nodes.push_back(id(i, j));
  mesh.h = std::sqrt(2.0) * h;
  collect_interface_facets(mesh);
  if (check == Interiority::Strict) check_damped_interior(mesh);
  return mesh;
}

bool omega_contains(const OmegaDescriptor& omega, const std::array<double, 2>& p) {
  if (const auto* iv = std::get_if<IntervalOmega>(&omega)) return p[0] > iv->a && p[0] < iv->b;
  const auto& r = std::get<RectOmega>(omega);
  return p[0] > r.x0 && p[0] < r.x1 && p[1] > r.y0 && p[1] < r.y1;
}

int omega_dim(const OmegaDescriptor& omega) {
  return std::holds_alternative<IntervalOmega>(omega) ? 1 : 2;
}

double omega_measure(const OmegaDescriptor& omega) {
  if (const auto* iv = std::get_if<IntervalOmega>(&omega)) return iv->b - iv->a;
  const auto& r = std::get<RectOmega>(omega);
  return (r.x1 - r.x0) * (r.y1 - r.y0);
}

void write_mesh_dump(std::ostream& os, const Mesh& mesh) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "mesh dim " << mesh.dim << " nodes " << mesh.num_nodes() << " elements "
      << mesh.num_elements() << " h " << mesh.h << '\n';
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    buf << "node " << i << ' ' << mesh.nodes[i][0];
    if (mesh.dim == 2) buf << ' ' << mesh.nodes[i][1];
    buf << '\n';
  }
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    buf << "element " << e;
    for (int k = 0; k < mesh.nodes_per_element(); ++k) buf << ' ' << mesh.elements[e][k];
    buf << (mesh.element_region[e] == Region::Damped ? " DAMPED" : " ELASTIC") << '\n';
  }
  for (Index b : mesh.boundary_nodes) buf << "boundary " << b << '\n';
  for (const auto& f : mesh.interface_facets) {
    buf << "interface " << f.a;
    if (mesh.dim == 2) buf << ' ' << f.b;
    buf << '\n';
  }
  os << buf.str();
}

}  // namespace kvwave
