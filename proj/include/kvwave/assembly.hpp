#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>

#include "kvwave/common.hpp"
#include "kvwave/geometry.hpp"

namespace kvwave {

/// Point (u, v) of the discrete energy space: displacement and velocity
/// coefficients on the interior nodes.
template <typename Scalar>
struct BasicState {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v;

  static BasicState zero(Index n) {
    return {Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n),
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n)};
  }
  [[nodiscard]] Index size() const { return u.size(); }
};

using State = BasicState<double>;
using CState = BasicState<cplx>;

struct Factorizations;

/// Discrete operators of the damped wave generator on H^1_0 x L^2.
///
/// `M`, `K` and `D` act on interior nodes only (Dirichlet nodes eliminated).
/// `D` is `d` times the stiffness assembled over damped elements. The
/// Cholesky factors of `M` and `K` are computed once at assembly and shared
/// read-only, so every solve below is reentrant.
class OperatorSet {
 public:
  SpMat M;
  SpMat K;
  SpMat D;
  Index n_dof = 0;
  double d = 0.0;
  std::shared_ptr<const Mesh> mesh;
  std::vector<Index> dof_to_node;
  std::vector<Index> node_to_dof;  ///< -1 on Dirichlet nodes.

  /// Energy Gram matrix blockdiag(K, M) on (u, v).
  [[nodiscard]] SpMat gram() const;

  [[nodiscard]] Vec solve_mass(const Vec& b) const;
  [[nodiscard]] CVec solve_mass(const CVec& b) const;
  [[nodiscard]] Vec solve_stiffness(const Vec& b) const;
  [[nodiscard]] CVec solve_stiffness(const CVec& b) const;

  /// Lower Cholesky factors (natural ordering): M = Lm Lm^T, K = Lk Lk^T.
  [[nodiscard]] const SpMat& mass_factor() const;
  [[nodiscard]] const SpMat& stiffness_factor() const;

  /// Nodal interpolant of `fn` on the interior nodes.
  [[nodiscard]] Vec interpolate(const std::function<double(double, double)>& fn) const;

  std::shared_ptr<const Factorizations> factors;
};

OperatorSet assemble_operators(const Mesh& mesh, const DampingField& damping);

/// Stiffness and mass over the elements of one region, indexed by mesh node
/// (boundary nodes kept).
struct RegionMatrices {
  SpMat K;
  SpMat M;
};

RegionMatrices assemble_region(const Mesh& mesh, Region region);

/// A_h (u, v) = (v, -M^{-1}(K u + D v)).
State apply_generator(const OperatorSet& ops, const State& z);
CState apply_generator(const OperatorSet& ops, const CState& z);

/// A_h^{-1} (f, g) = (-K^{-1}(M g + D f), f).
State apply_generator_inverse(const OperatorSet& ops, const State& z);

/// E = (u^H K u + v^H M v) / 2.
double energy(const OperatorSet& ops, const State& z);
double energy(const OperatorSet& ops, const CState& z);

/// Energy-space norm ||z||_H = sqrt(2 E).
double energy_norm(const OperatorSet& ops, const State& z);
double energy_norm(const OperatorSet& ops, const CState& z);

/// Random state with ||y||_H = 1 drawn from the given seed.
State random_unit_state(const OperatorSet& ops, std::uint64_t seed);

struct DomainData {
  State z;
  double norm = 0.0;  ///< (sum_{j<=k} ||A_h^j z||_H^2)^{1/2}
  int k = 0;
};

/// z = A_h^{-k} y for a random unit-norm y; smooth data in D(A_h^k).
DomainData make_dAk_data(const OperatorSet& ops, int k, std::uint64_t seed);

/// Graph norm (sum_{j<=k} ||A_h^j z||_H^2)^{1/2}.
double domain_norm(const OperatorSet& ops, const State& z, int k);

/// (row, col, value) triplets, one per line, 17 significant digits.
void write_triplets(std::ostream& os, const SpMat& a);

}  // namespace kvwave
