#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/linalg.hpp"

namespace loopsoup {

/// Closed-form scalar with a digest of the energy form it was computed from.
struct IdentityValue {
  std::string name;
  Complex value;
  std::uint64_t inputs_digest = 0;
};

/// FNV-1a digest of names, conductances and killing (bitwise).
std::uint64_t digest(const EnergyForm& e);

/// Thrown when two evaluation routes of one identity disagree.
class IdentityMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double log_zeta(const EnergyForm& e);
/// Z_e = det G.
double zeta(const EnergyForm& e);

/// Mass of nontrivial loops: -log det(I - P).
double loop_mass_nontrivial(const EnergyForm& e);

/// alpha * log of the three determinant expressions of the soup Laplace
/// transform: -log det(I + G M_chi), log det(I - G_chi M_chi), log det(G_chi G^-1).
struct LaplaceRoutes {
  double via_green = 0.0;
  double via_resolvent = 0.0;
  double via_ratio = 0.0;
};
LaplaceRoutes occupation_laplace_routes(const EnergyForm& e, const Vector& chi, double alpha);
/// E exp(-<L_alpha, chi>); throws IdentityMismatch if the routes differ by > 1e-10.
double occupation_laplace_exact(const EnergyForm& e, const Vector& chi, double alpha);

double avoidance_probability(const EnergyForm& e, const VertexSet& f, double alpha);
double visit_probability(const EnergyForm& e, std::size_t x, double alpha);
/// Probability that some nontrivial loop visits both x and y.
double joint_visit_probability(const EnergyForm& e, std::size_t x, std::size_t y, double alpha);

/// mu(every F_i is visited, p > 1) by inclusion-exclusion over the killed
/// determinants of the intersections of D_i = F_i^c.
double joint_visit_log_mass(const EnergyForm& e, const std::vector<VertexSet>& sets);

/// sum over permutations of alpha^{#cycles} prod M_{i, sigma(i)}; k <= 10.
double alpha_permanent(const Matrix& m, double alpha);

/// E <L_alpha, chi>^k as a sum of alpha-permanents of G; k <= 6.
double occupation_moment_exact(const EnergyForm& e, const Vector& chi, int k, double alpha);

/// det(delta_ij + sqrt(lambda_i lambda_j (1-s_i)(1-s_j)/(s_i s_j)) G_ij)^-alpha,
/// equal to E prod s_i^{N_i + alpha} for the soup visit counts N_i.
double nvisit_generating_exact(const EnergyForm& e, const std::vector<std::size_t>& points,
                               const std::vector<double>& s, double alpha);

/// mu(s^{N_xy}; p > 1) = -log det(I - P^(s)) where P_xy is scaled by s.
double edge_count_generating(const EnergyForm& e, std::size_t x, std::size_t y, double s);

/// (Z_{e,omega} / Z_e)^alpha. Throws IdentityMismatch if the imaginary part
/// of the log exceeds 1e-10.
Complex current_laplace_exact(const EnergyForm& e, const Current& omega, double alpha);

/// Throws ModelError unless the loop integral of omega is an integer on every
/// fundamental cycle of the X-graph.
void check_integer_winding(const EnergyForm& e, const Current& omega);

/// mu(integral of omega over the loop != 0) for an integer-winding current:
/// -int_0^1 log det(G^{2 pi u omega} G^-1) du by composite Simpson, 64 panels
/// doubled until successive estimates differ by < 1e-8.
double winding_nonzero_mass(const EnergyForm& e, const Current& omega);

/// log(Z_{e'} / Z_e).
double log_zeta_ratio(const EnergyForm& e, const EnergyForm& e_prime);

/// Conductances on `links` set to zero, kappa raised to keep lambda.
EnergyForm avoided_links(const EnergyForm& e, const std::vector<Link>& links);

/// Probability that no loop of L_alpha traverses any link of R.
double link_avoidance_probability(const EnergyForm& e, const std::vector<Link>& links, double alpha);

/// E exp(-sum g(x,y) N_xy) over L_alpha, with lambda held fixed.
struct LinkLaplace {
  double canonical = 0.0;  // (det(M - C o e^-g) / det(M - C))^-alpha
  double k_form = 0.0;     // det(I - K M(g))^-alpha
  double discrepancy() const { return std::abs(canonical - k_form); }
};
/// g: symmetric nonnegative matrix over X-links.
LinkLaplace link_laplace_exact(const EnergyForm& e, const Matrix& g, double alpha);

/// E_ST exp(-sum over tree links of g) = det(I + K M_{C(e^-g - 1)}).
/// g is (n+1)x(n+1) symmetric over X and the cemetery; +inf is allowed.
double tree_link_laplace_exact(const EnergyForm& e, const Matrix& g);

struct ZetaFactorization {
  double zeta = 0.0;         // Z_e
  double zeta_killed = 0.0;  // Z_{e^D}, 1 when D is empty
  double zeta_traced = 0.0;  // Z_{e^{F}}
  bool holds(double tol = 1e-10) const;
};
ZetaFactorization zeta_factorization_check(const EnergyForm& e, const VertexSet& f);

}  // namespace loopsoup
