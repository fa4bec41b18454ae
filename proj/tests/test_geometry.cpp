#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "kvwave/geometry.hpp"

using namespace kvwave;

namespace {

std::vector<Index> damped_elements(const Mesh& m) {
  std::vector<Index> out;
  for (Index e = 0; e < m.num_elements(); ++e)
    if (m.element_region[e] == Region::Damped) out.push_back(e);
  return out;
}

// Independent count: an edge is on the interface when exactly one damped and
// one elastic triangle share it.
int count_interface_edges(const Mesh& m) {
  std::map<std::pair<Index, Index>, std::pair<int, int>> edges;
  for (Index e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.elements[e];
    for (int k = 0; k < 3; ++k) {
      Index a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto& c = edges[{a, b}];
      (m.element_region[e] == Region::Damped ? c.first : c.second)++;
    }
  }
  int n = 0;
  for (const auto& [key, c] : edges)
    if (c.first == 1 && c.second == 1) ++n;
  return n;
}

}  // namespace

TEST_CASE("interval mesh with ten cells tags four damped elements") {
  const Mesh m = build_interval_mesh(10, {0.3, 0.7});
  CHECK(m.num_elements() == 10);
  const auto damped = damped_elements(m);
  REQUIRE(damped.size() == 4);
  const double mids[] = {0.35, 0.45, 0.55, 0.65};
  for (std::size_t k = 0; k < 4; ++k) CHECK(m.element_center(damped[k])[0] == doctest::Approx(mids[k]));
  const auto iface = m.interface_nodes();
  REQUIRE(iface.size() == 2);
  CHECK(m.nodes[iface[0]][0] == doctest::Approx(0.3));
  CHECK(m.nodes[iface[1]][0] == doctest::Approx(0.7));
  REQUIRE(m.interface_facets.size() == 2);
  CHECK(m.interface_facets[0].a == m.interface_facets[0].b);
}

TEST_CASE("interval mesh aligned exactly on quarters") {
  const Mesh m = build_interval_mesh(4, {0.25, 0.75});
  CHECK(damped_elements(m) == std::vector<Index>{1, 2});
  CHECK(m.nodes[m.elements[1][0]][0] == 0.25);
  CHECK(m.nodes[m.elements[2][1]][0] == 0.75);
  std::vector<double> b;
  for (Index i : m.boundary_nodes) b.push_back(m.nodes[i][0]);
  CHECK(b == std::vector<double>{0.0, 1.0});
}

TEST_CASE("interval mesh rejects bad damped regions") {
  CHECK_THROWS_AS(build_interval_mesh(10, {0.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(10, {0.5, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(10, {0.6, 0.4}), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(10, {0.41, 0.43}), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(4, {0.05, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(build_interval_mesh(3, {0.3, 0.7}), InvalidArgument);
  CHECK_NOTHROW(build_interval_mesh(4, {0.0, 1.0}, Interiority::Relaxed));
}

TEST_CASE("square mesh counts") {
  const Mesh m = build_square_mesh(16, {0.25, 0.75, 0.25, 0.75});
  CHECK(m.num_elements() == 512);
  CHECK(m.count_region(Region::Damped) == 128);
  CHECK(m.interface_facets.size() == 32);
  CHECK(count_interface_edges(m) == 32);
  CHECK(m.boundary_nodes.size() == 64);
}

TEST_CASE("square mesh rejects bad input") {
  CHECK_THROWS_AS(build_square_mesh(16, {0.0, 0.5, 0.0, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(build_square_mesh(7, {0.25, 0.75, 0.25, 0.75}), InvalidArgument);
  CHECK_THROWS_AS(build_square_mesh(16, {0.5, 0.5, 0.2, 0.7}), InvalidArgument);
}

TEST_CASE("region partition and exact damped measure") {
  for (Index n : {8, 20, 50}) {
    const Mesh m = build_interval_mesh(n * 2, {0.25, 0.75});
    CHECK(m.count_region(Region::Damped) + m.count_region(Region::Elastic) == m.num_elements());
    CHECK(m.region_measure(Region::Damped) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(m.region_measure(Region::Damped) + m.region_measure(Region::Elastic) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  for (Index n : {8, 16, 32}) {
    const Mesh m = build_square_mesh(n, {0.25, 0.5, 0.375, 0.75});
    CHECK(m.count_region(Region::Damped) + m.count_region(Region::Elastic) == m.num_elements());
    CHECK(m.region_measure(Region::Damped) == doctest::Approx(0.25 * 0.375).epsilon(1e-13));
    CHECK(m.region_measure(Region::Damped) + m.region_measure(Region::Elastic) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("elements partition the interval without gaps") {
  const Mesh m = build_interval_mesh(37, {0.2, 0.6});
  double x = 0.0;
  for (Index e = 0; e < m.num_elements(); ++e) {
    CHECK(m.nodes[m.elements[e][0]][0] == doctest::Approx(x));
    x = m.nodes[m.elements[e][1]][0];
  }
  CHECK(x == doctest::Approx(1.0));
}

TEST_CASE("refinement preserves region tags under containment") {
  const Mesh coarse1 = build_interval_mesh(10, {0.3, 0.7});
  const Mesh fine1 = build_interval_mesh(20, {0.3, 0.7});
  for (Index e = 0; e < coarse1.num_elements(); ++e)
    for (Index c : {2 * e, 2 * e + 1}) CHECK(fine1.element_region[c] == coarse1.element_region[e]);

  const RectOmega w{0.25, 0.75, 0.375, 0.625};
  const Mesh coarse2 = build_square_mesh(8, w);
  const Mesh fine2 = build_square_mesh(16, w);
  for (Index e = 0; e < fine2.num_elements(); ++e) {
    const auto c = fine2.element_center(e);
    const Index i = static_cast<Index>(c[0] * 8), j = static_cast<Index>(c[1] * 8);
    // A fine triangle lies inside coarse cell (i, j); both coarse triangles of
    // that cell carry the same tag.
    CHECK(fine2.element_region[e] == coarse2.element_region[2 * (j * 8 + i)]);
  }
}

TEST_CASE("mesh dump lists every record") {
  const Mesh m = build_interval_mesh(4, {0.25, 0.75});
  std::ostringstream os;
  write_mesh_dump(os, m);
  std::istringstream in(os.str());
  std::map<std::string, int> kinds;
  std::string line;
  while (std::getline(in, line)) kinds[line.substr(0, line.find(' '))]++;
  CHECK(kinds["mesh"] == 1);
  CHECK(kinds["node"] == 5);
  CHECK(kinds["element"] == 4);
  CHECK(kinds["boundary"] == 2);
  CHECK(kinds["interface"] == 2);
  CHECK(os.str().find("element 1 1 2 DAMPED") != std::string::npos);
}

TEST_CASE("omega descriptor helpers") {
  const OmegaDescriptor iv = IntervalOmega{0.3, 0.7};
  const OmegaDescriptor rc = RectOmega{0.25, 0.75, 0.25, 0.5};
  CHECK(omega_dim(iv) == 1);
  CHECK(omega_dim(rc) == 2);
  CHECK(omega_measure(rc) == doctest::Approx(0.125));
  CHECK(omega_contains(iv, {0.5, 0.0}));
  CHECK_FALSE(omega_contains(iv, {0.3, 0.0}));
  CHECK_FALSE(omega_contains(rc, {0.5, 0.6}));
}
