#include "kvwave/transmission.hpp"

#include <cmath>

#include <Eigen/SparseLU>

#include "kvwave/resolvent.hpp"

namespace kvwave {

namespace {

enum class Slot : std::uint8_t { None, DampedInterior, Elastic };

std::vector<Index> flagged(const std::vector<bool>& mask) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) out.push_back(static_cast<Index>(i));
  return out;
}

}  // namespace

TransmissionState solve_transmission(const Mesh& mesh, const DampingField& damping, double mu, const CVec& f,
                                     const CVec& g) {
  const Index nn = mesh.num_nodes();
  require(f.size() == nn && g.size() == nn, "solve_transmission: f and g must be node-indexed");
  require(std::isfinite(mu), "solve_transmission: mu must be finite");
  const double d = damping.d;
  const cplx i_mu(0.0, mu);
  const cplx s = 1.0 + cplx(0.0, d * mu);
  const cplx k1 = (mu * mu) / s;

  const auto on_boundary = mesh.boundary_mask();
  const auto touches_damped = mesh.nodes_touching(Region::Damped);
  const auto touches_elastic = mesh.nodes_touching(Region::Elastic);

  TransmissionState st;
  st.mu = mu;
  st.d = d;
  st.damped_nodes = flagged(touches_damped);
  st.elastic_nodes = flagged(touches_elastic);

  // Unknowns: w1 at damped nodes off the interface, w2 at free elastic
  // nodes (interface included); w1 at the interface is s w2 + d f.
  std::vector<Slot> slot(nn, Slot::None);
  std::vector<Index> unknown(nn, -1);
  Index count = 0;
  for (Index i = 0; i < nn; ++i) {
    if (on_boundary[i]) continue;
    if (touches_elastic[i]) {
      slot[i] = Slot::Elastic;
    } else if (touches_damped[i]) {
      slot[i] = Slot::DampedInterior;
    } else {
      continue;
    }
    unknown[i] = count++;
  }
  for (Index i = 0; i < nn; ++i)
    if (touches_damped[i] && touches_elastic[i] && !on_boundary[i]) st.interface_nodes.push_back(i);

  CVec fn = f, gn = g;
  for (Index i = 0; i < nn; ++i)
    if (on_boundary[i]) fn[i] = gn[i] = 0.0;

  const RegionMatrices damped = assemble_region(mesh, Region::Damped);
  const RegionMatrices elastic = assemble_region(mesh, Region::Elastic);
  const CSpMat a1 = damped.K.cast<cplx>() - k1 * damped.M.cast<cplx>();
  const CSpMat a2 = elastic.K.cast<cplx>() - cplx(mu * mu) * elastic.M.cast<cplx>();
  const CVec phi1 = gn + (i_mu / s) * fn;
  const CVec phi2 = gn + i_mu * fn;
  const CVec src1 = damped.M.cast<cplx>() * phi1;
  const CVec src2 = elastic.M.cast<cplx>() * phi2;

  std::vector<Eigen::Triplet<cplx>> trip;
  CVec rhs = CVec::Zero(count);
  for (int c = 0; c < a1.outerSize(); ++c) {
    for (CSpMat::InnerIterator it(a1, c); it; ++it) {
      const Index r = it.row(), col = it.col();
      if (unknown[r] < 0 || on_boundary[col]) continue;
      if (slot[col] == Slot::DampedInterior) {
        trip.emplace_back(unknown[r], unknown[col], it.value());
      } else {
        trip.emplace_back(unknown[r], unknown[col], s * it.value());
        rhs[unknown[r]] -= it.value() * d * fn[col];
      }
    }
  }
  for (int c = 0; c < a2.outerSize(); ++c) {
    for (CSpMat::InnerIterator it(a2, c); it; ++it) {
      const Index r = it.row(), col = it.col();
      if (unknown[r] < 0 || unknown[col] < 0) continue;
      trip.emplace_back(unknown[r], unknown[col], it.value());
    }
  }
  for (Index i = 0; i < nn; ++i) {
    if (unknown[i] < 0) continue;
    rhs[unknown[i]] -= src1[i] + src2[i];
  }

  CSpMat sys(count, count);
  sys.setFromTriplets(trip.begin(), trip.end());
  sys.makeCompressed();
  CVec x = CVec::Zero(count);
  if (count > 0 && rhs.norm() > 0.0) {
    Eigen::SparseLU<CSpMat> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) throw NumericalError("solve_transmission: singular coupled system");
    x = lu.solve(rhs);
    if (!x.allFinite()) throw NumericalError("solve_transmission: singular coupled system");
    const double rn = rhs.norm();
    st.residual = (sys * x - rhs).norm() / rn;
  }

  CVec w1n = CVec::Zero(nn), w2n = CVec::Zero(nn);
  for (Index i = 0; i < nn; ++i) {
    if (slot[i] == Slot::DampedInterior) w1n[i] = x[unknown[i]];
    if (slot[i] == Slot::Elastic) {
      w2n[i] = x[unknown[i]];
      if (touches_damped[i]) w1n[i] = s * w2n[i] + d * fn[i];
    }
  }
  st.w1.resize(static_cast<Index>(st.damped_nodes.size()));
  for (std::size_t k = 0; k < st.damped_nodes.size(); ++k) st.w1[k] = w1n[st.damped_nodes[k]];
  st.w2.resize(static_cast<Index>(st.elastic_nodes.size()));
  for (std::size_t k = 0; k < st.elastic_nodes.size(); ++k) st.w2[k] = w2n[st.elastic_nodes[k]];
  st.phi.resize(static_cast<Index>(st.interface_nodes.size()));
  for (std::size_t k = 0; k < st.interface_nodes.size(); ++k) {
    const Index i = st.interface_nodes[k];
    st.phi[k] = w1n[i] - w2n[i];
  }

  // Discrete normal fluxes: residual of each side's equation at the interface.
  const CVec r1 = a1 * w1n + src1;
  const CVec r2 = a2 * w2n + src2;
  double jump = 0.0, size1 = 0.0, size2 = 0.0;
  for (Index i : st.interface_nodes) {
    jump += std::norm(r1[i] + r2[i]);
    size1 += std::norm(r1[i]);
    size2 += std::norm(r2[i]);
  }
  const double denom = std::sqrt(size1) + std::sqrt(size2);
  st.flux_jump = denom > 0.0 ? std::sqrt(jump) / denom : 0.0;
  return st;
}

CVec reconstruct_displacement(const TransmissionState& state, const Mesh& mesh, const CVec& f) {
  const Index nn = mesh.num_nodes();
  require(f.size() == nn, "reconstruct_displacement: f must be node-indexed");
  const cplx s = 1.0 + cplx(0.0, state.d * state.mu);
  const auto on_boundary = mesh.boundary_mask();
  CVec u = CVec::Zero(nn);
  for (std::size_t k = 0; k < state.damped_nodes.size(); ++k) {
    const Index i = state.damped_nodes[k];
    if (!on_boundary[i]) u[i] = (state.w1[k] - state.d * f[i]) / s;
  }
  for (std::size_t k = 0; k < state.elastic_nodes.size(); ++k) u[state.elastic_nodes[k]] = state.w2[k];
  return u;
}

CVec dofs_to_nodes(const OperatorSet& ops, const CVec& x) {
  require(x.size() == ops.n_dof, "dofs_to_nodes: dimension mismatch");
  CVec out = CVec::Zero(static_cast<Index>(ops.node_to_dof.size()));
  for (Index k = 0; k < ops.n_dof; ++k) out[ops.dof_to_node[k]] = x[k];
  return out;
}

CVec nodes_to_dofs(const OperatorSet& ops, const CVec& x) {
  require(x.size() == static_cast<Index>(ops.node_to_dof.size()), "nodes_to_dofs: dimension mismatch");
  CVec out(ops.n_dof);
  for (Index k = 0; k < ops.n_dof; ++k) out[k] = x[ops.dof_to_node[k]];
  return out;
}

double transmission_equivalence(const OperatorSet& ops, const DampingField& damping, double mu, const CVec& f,
                                const CVec& g) {
  require(ops.mesh != nullptr, "transmission_equivalence: operators carry no mesh");
  const ResolventSolution mono = monolithic_resolvent_solve(ops, mu, f, g);
  const CVec fn = dofs_to_nodes(ops, f);
  const TransmissionState st = solve_transmission(*ops.mesh, damping, mu, fn, dofs_to_nodes(ops, g));
  CState rec;
  rec.u = nodes_to_dofs(ops, reconstruct_displacement(st, *ops.mesh, fn));
  rec.v = cplx(0.0, mu) * rec.u + f;
  const double ref = energy_norm(ops, mono.z);
  const CState diff{mono.z.u - rec.u, mono.z.v - rec.v};
  const double gap = energy_norm(ops, diff);
  if (ref == 0.0) return gap;
  return gap / ref;
}

}  // namespace kvwave
