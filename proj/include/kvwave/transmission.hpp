#pragma once

#include <vector>

#include "kvwave/assembly.hpp"

namespace kvwave {

/// Resolvent problem rewritten as a coupled Helmholtz pair across the
/// interface. With s = 1 + i d mu:
///   damped side   w1 = s u + d f,  Laplace(w1) + (mu^2 / s) w1 = g + (i mu / s) f
///   elastic side  w2 = u,          Laplace(w2) + mu^2 w2 = g + i mu f
/// coupled by w1 = w2 + phi, phi = d f + i d mu u, and continuity of the
/// normal flux; w2 = 0 on the outer boundary.
struct TransmissionState {
  std::vector<Index> damped_nodes;   ///< closure of the damped region, sorted
  CVec w1;                           ///< aligned with damped_nodes
  std::vector<Index> elastic_nodes;  ///< closure of the elastic region, sorted
  CVec w2;                           ///< aligned with elastic_nodes; 0 on the boundary
  std::vector<Index> interface_nodes;
  CVec phi;                          ///< aligned with interface_nodes
  double mu = 0.0;
  double d = 0.0;
  double flux_jump = 0.0;  ///< ||r1 + r2|| / (||r1|| + ||r2||) at interface nodes
  double residual = 0.0;   ///< relative residual of the coupled system
};

/// `f` and `g` are node-indexed (length num_nodes); boundary entries are
/// ignored. The affine interface datum is eliminated exactly, so the coupled
/// system is solved once by sparse LU.
TransmissionState solve_transmission(const Mesh& mesh, const DampingField& damping, double mu,
                                     const CVec& f, const CVec& g);

/// Displacement on every mesh node: (w1 - d f) / s on the damped side, w2
/// elsewhere.
CVec reconstruct_displacement(const TransmissionState& state, const Mesh& mesh, const CVec& f);

/// Relative energy-norm difference between the monolithic solve and the
/// reconstructed transmission solution; `f`, `g` are dof vectors.
double transmission_equivalence(const OperatorSet& ops, const DampingField& damping, double mu,
                                const CVec& f, const CVec& g);

/// Dof vector to node-indexed field with zeros on the Dirichlet nodes.
CVec dofs_to_nodes(const OperatorSet& ops, const CVec& x);
CVec nodes_to_dofs(const OperatorSet& ops, const CVec& x);

}  // namespace kvwave
