#pragma once

#include <cstddef>
#include <vector>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/linalg.hpp"

namespace loopsoup {

enum class KernelKind { kPlain, kChiPerturbed, kKilled, kRestrictedToF };

/// Green function on a vertex subset `support` (all of X for plain kernels).
struct GreenKernel {
  Matrix matrix;
  KernelKind kind = KernelKind::kPlain;
  VertexSet support;

  double operator()(std::size_t i, std::size_t j) const {
    return matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// Oriented link (from, to); `to` may be the cemetery index.
struct Link {
  std::size_t from = 0;
  std::size_t to = 0;
  Link reversed() const { return {to, from}; }
  bool operator==(const Link&) const = default;
};

/// Gram matrix of the link currents dG(delta_x - delta_y).
struct TransferMatrix {
  std::vector<Link> links;
  Matrix matrix;
};

/// P_xy = C_xy / lambda_x over X.
Matrix transition_matrix(const EnergyForm& e);

/// (M_lambda - C)^{-1}.
GreenKernel green(const EnergyForm& e);

/// (M_lambda + M_chi - C)^{-1}; chi >= 0 is added to the killing measure.
GreenKernel green_chi(const EnergyForm& e, const Vector& chi);

/// [(M_lambda - C)|_{DxD}]^{-1}, the Green function of the chain killed outside D.
GreenKernel green_killed(const EnergyForm& e, const VertexSet& d);

/// Hitting distribution of F: rows indexed by X, columns by the entries of F.
Matrix hitting_matrix(const EnergyForm& e, const VertexSet& f);

/// Potential of a zero-charge measure mu on X plus the cemetery (size n + 1)
/// for the resurrected chain, normalized to have zero lambda-mean.
Vector resurrected_green(const EnergyForm& e, const Vector& mu);

/// X-links {x<y, C_xy>0} followed by cemetery links (x, Delta) with kappa_x > 0.
std::vector<Link> default_links(const EnergyForm& e);

/// K over all default links.
TransferMatrix transfer_matrix(const EnergyForm& e);
/// K over an explicit list of oriented links.
TransferMatrix transfer_matrix(const EnergyForm& e, std::vector<Link> links);
/// K entry computed from the resurrected-chain potentials instead of G.
double transfer_entry_resurrected(const EnergyForm& e, Link a, Link b);

/// (M_lambda - C o e^{i omega})^{-1}, Hermitian.
CMatrix twisted_green(const EnergyForm& e, const Current& omega);

/// Energy form of the chain traced on F (effective conductances through D = F^c).
EnergyForm trace_energy(const EnergyForm& e, const VertexSet& f);

}  // namespace loopsoup
