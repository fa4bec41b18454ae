#include "kvwave/assembly.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

namespace kvwave {

struct Factorizations {
  using Chol = Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::NaturalOrdering<int>>;
  Chol mass;
  Chol stiffness;
  SpMat mass_l;
  SpMat stiffness_l;
};

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct ElementMatrices {
  std::array<std::array<double, 3>, 3> k{};
  std::array<std::array<double, 3>, 3> m{};
};

ElementMatrices element_matrices(const Mesh& mesh, Index e) {
  ElementMatrices out;
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) {
    const double h = mesh.element_measure(e);
    out.k[0] = {1.0 / h, -1.0 / h, 0.0};
    out.k[1] = {-1.0 / h, 1.0 / h, 0.0};
    out.m[0] = {h / 3.0, h / 6.0, 0.0};
    out.m[1] = {h / 6.0, h / 3.0, 0.0};
    return out;
  }
  const double area = mesh.element_measure(e);
  std::array<double, 3> b{}, c{};
  for (int i = 0; i < 3; ++i) {
    const auto& pj = mesh.nodes[el[(i + 1) % 3]];
    const auto& pk = mesh.nodes[el[(i + 2) % 3]];
    b[i] = pj[1] - pk[1];
    c[i] = pk[0] - pj[0];
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      out.k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
      out.m[i][j] = area / 12.0 * (i == j ? 2.0 : 1.0);
    }
  }
  return out;
}

void check_consistency(const Mesh& mesh, const DampingField& damping) {
  if (omega_dim(damping.omega) != mesh.dim)
    throw InvalidArgument("assemble_operators: damping descriptor dimension differs from mesh");
  require(damping.d >= 0.0 && std::isfinite(damping.d),
          "assemble_operators: damping coefficient must be finite and nonnegative");
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const bool inside = omega_contains(damping.omega, mesh.element_center(e));
    if (inside != (mesh.element_region[e] == Region::Damped))
      throw InvalidArgument("assemble_operators: mesh region tags disagree with the damping descriptor at element " +
                            std::to_string(e));
  }
}

template <typename Solver, typename V>
V solve_split(const Solver& solver, const V& b) {
  if constexpr (std::is_same_v<typename V::Scalar, double>) {
    return solver.solve(b);
  } else {
    const Vec re = solver.solve(Vec(b.real()));
    const Vec im = solver.solve(Vec(b.imag()));
    V out(b.size());
    out.real() = re;
    out.imag() = im;
    return out;
  }
}

template <typename Scalar>
BasicState<Scalar> apply_generator_impl(const OperatorSet& ops, const BasicState<Scalar>& z) {
  require(z.u.size() == ops.n_dof && z.v.size() == ops.n_dof,
          "apply_generator: state dimension mismatch");
  using V = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const V rhs = ops.K * z.u + ops.D * z.v;
  return {z.v, -ops.solve_mass(V(rhs))};
}

template <typename Scalar>
double energy_impl(const OperatorSet& ops, const BasicState<Scalar>& z) {
  require(z.u.size() == ops.n_dof && z.v.size() == ops.n_dof, "energy: state dimension mismatch");
  const double ku = std::real(z.u.dot(ops.K * z.u));
  const double mv = std::real(z.v.dot(ops.M * z.v));
  return 0.5 * (ku + mv);
}

}  // namespace

SpMat OperatorSet::gram() const {
  Triplets t;
  t.reserve(K.nonZeros() + M.nonZeros());
  for (int c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int c = 0; c < M.outerSize(); ++c)
    for (SpMat::InnerIterator it(M, c); it; ++it)
      t.emplace_back(n_dof + it.row(), n_dof + it.col(), it.value());
  SpMat g(2 * n_dof, 2 * n_dof);
  g.setFromTriplets(t.begin(), t.end());
  return g;
}

Vec OperatorSet::solve_mass(const Vec& b) const { return solve_split(factors->mass, b); }
CVec OperatorSet::solve_mass(const CVec& b) const { return solve_split(factors->mass, b); }
Vec OperatorSet::solve_stiffness(const Vec& b) const { return solve_split(factors->stiffness, b); }
CVec OperatorSet::solve_stiffness(const CVec& b) const { return solve_split(factors->stiffness, b); }
const SpMat& OperatorSet::mass_factor() const { return factors->mass_l; }
const SpMat& OperatorSet::stiffness_factor() const { return factors->stiffness_l; }

Vec OperatorSet::interpolate(const std::function<double(double, double)>& fn) const {
  Vec out(n_dof);
  for (Index i = 0; i < n_dof; ++i) {
    const auto& p = mesh->nodes[dof_to_node[i]];
    out[i] = fn(p[0], p[1]);
  }
  return out;
}

OperatorSet assemble_operators(const Mesh& mesh, const DampingField& damping) {
  check_consistency(mesh, damping);

  OperatorSet ops;
  ops.d = damping.d;
  ops.mesh = std::make_shared<const Mesh>(mesh);
  ops.node_to_dof.assign(mesh.num_nodes(), -1);
  const auto on_boundary = mesh.boundary_mask();
  for (Index i = 0; i < mesh.num_nodes(); ++i) {
    if (on_boundary[i]) continue;
    ops.node_to_dof[i] = static_cast<Index>(ops.dof_to_node.size());
    ops.dof_to_node.push_back(i);
  }
  ops.n_dof = static_cast<Index>(ops.dof_to_node.size());
  require(ops.n_dof > 0, "assemble_operators: mesh has no interior nodes");

  Triplets tk, tm, td;
  const int npe = mesh.nodes_per_element();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto em = element_matrices(mesh, e);
    const bool damped = mesh.element_region[e] == Region::Damped;
    for (int i = 0; i < npe; ++i) {
      const Index r = ops.node_to_dof[mesh.elements[e][i]];
      if (r < 0) continue;
      for (int j = 0; j < npe; ++j) {
        const Index c = ops.node_to_dof[mesh.elements[e][j]];
        if (c < 0) continue;
        tk.emplace_back(r, c, em.k[i][j]);
        tm.emplace_back(r, c, em.m[i][j]);
        if (damped && damping.d != 0.0) td.emplace_back(r, c, damping.d * em.k[i][j]);
      }
    }
  }
  const Index n = ops.n_dof;
  ops.K.resize(n, n);
  ops.M.resize(n, n);
  ops.D.resize(n, n);
  ops.K.setFromTriplets(tk.begin(), tk.end());
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.D.setFromTriplets(td.begin(), td.end());

  auto f = std::make_shared<Factorizations>();
  f->mass.compute(ops.M);
  f->stiffness.compute(ops.K);
  if (f->mass.info() != Eigen::Success || f->stiffness.info() != Eigen::Success)
    throw NumericalError("assemble_operators: mass or stiffness matrix is not positive definite");
  f->mass_l = f->mass.matrixL();
  f->stiffness_l = f->stiffness.matrixL();
  ops.factors = std::move(f);
  return ops;
}

RegionMatrices assemble_region(const Mesh& mesh, Region region) {
  Triplets tk, tm;
  const int npe = mesh.nodes_per_element();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    if (mesh.element_region[e] != region) continue;
    const auto em = element_matrices(mesh, e);
    for (int i = 0; i < npe; ++i) {
      for (int j = 0; j < npe; ++j) {
        tk.emplace_back(mesh.elements[e][i], mesh.elements[e][j], em.k[i][j]);
        tm.emplace_back(mesh.elements[e][i], mesh.elements[e][j], em.m[i][j]);
      }
    }
  }
  const Index n = mesh.num_nodes();
  RegionMatrices out;
  out.K.resize(n, n);
  out.M.resize(n, n);
  out.K.setFromTriplets(tk.begin(), tk.end());
  out.M.setFromTriplets(tm.begin(), tm.end());
  return out;
}

State apply_generator(const OperatorSet& ops, const State& z) { return apply_generator_impl(ops, z); }
CState apply_generator(const OperatorSet& ops, const CState& z) { return apply_generator_impl(ops, z); }

State apply_generator_inverse(const OperatorSet& ops, const State& z) {
  require(z.u.size() == ops.n_dof && z.v.size() == ops.n_dof,
          "apply_generator_inverse: state dimension mismatch");
  const Vec rhs = ops.M * z.v + ops.D * z.u;
  return {-ops.solve_stiffness(rhs), z.u};
}

double energy(const OperatorSet& ops, const State& z) { return energy_impl(ops, z); }
double energy(const OperatorSet& ops, const CState& z) { return energy_impl(ops, z); }
double energy_norm(const OperatorSet& ops, const State& z) { return std::sqrt(2.0 * energy(ops, z)); }
double energy_norm(const OperatorSet& ops, const CState& z) { return std::sqrt(2.0 * energy(ops, z)); }

State random_unit_state(const OperatorSet& ops, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  State y = State::zero(ops.n_dof);
  for (Index i = 0; i < ops.n_dof; ++i) y.u[i] = normal(rng);
  for (Index i = 0; i < ops.n_dof; ++i) y.v[i] = normal(rng);
  const double nrm = energy_norm(ops, y);
  y.u /= nrm;
  y.v /= nrm;
  return y;
}

double domain_norm(const OperatorSet& ops, const State& z, int k) {
  double sum = 0.0;
  State w = z;
  for (int j = 0; j <= k; ++j) {
    sum += 2.0 * energy(ops, w);
    if (j < k) w = apply_generator(ops, w);
  }
  return std::sqrt(sum);
}

DomainData make_dAk_data(const OperatorSet& ops, int k, std::uint64_t seed) {
  require(k >= 0 && k <= 4, "make_dAk_data: k must be in [0, 4]");
  State z = random_unit_state(ops, seed);
  for (int j = 0; j < k; ++j) {
    z = apply_generator_inverse(ops, z);
    if (!z.u.allFinite() || !z.v.allFinite())
      throw NumericalError("make_dAk_data: discrete generator is singular");
  }
  const double nrm = domain_norm(ops, z, k);
  return {std::move(z), nrm, k};
}

void write_triplets(std::ostream& os, const SpMat& a) {
  std::ostringstream buf;
  buf.precision(17);
  buf << "row,col,value\n";
  for (int c = 0; c < a.outerSize(); ++c)
    for (SpMat::InnerIterator it(a, c); it; ++it)
      buf << it.row() << ',' << it.col() << ',' << it.value() << '\n';
  os << buf.str();
}

}  // namespace kvwave
