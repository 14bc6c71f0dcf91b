#pragma once

#include <cstddef>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/linalg.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/paths_trees.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

using CVector = Eigen::VectorXcd;

/// Complex field with E[phi_x conj(phi_y)] = 2 G^{xy}; Re phi is the real
/// free field with covariance G.
struct GaussField {
  CVector values;

  Vector real() const { return values.real(); }
  /// 1/2 |phi|^2, distributed as the occupation field of the soup at alpha = 1.
  Vector half_square() const;
};

/// phi = B (zeta_1 + i zeta_2) with B B^T = G (Cholesky, cached). Draws: n
/// normals for zeta_1 then n for zeta_2.
class FieldSampler {
 public:
  explicit FieldSampler(const EnergyForm& e);
  GaussField sample(Stream& rng) const;
  /// Real field B zeta with n normal draws.
  Vector sample_real(Stream& rng) const;
  const Matrix& factor() const { return factor_; }

 private:
  Matrix factor_;
};

GaussField sample_field(const EnergyForm& e, Stream& rng);

// Generalized second Ray-Knight (Dynkin) isomorphism, tested on the Laplace
// functional exp(-<., chi>).

/// (G_chi)^{xy} det(G_chi G^-1), the common value of both sides.
double dynkin_exact(const EnergyForm& e, std::size_t x, std::size_t y, const Vector& chi);
/// Field side: Re(phi_x conj(phi_y)) / 2 * exp(-<|phi|^2 / 2, chi>).
double dynkin_field_sample(const GaussField& phi, std::size_t x, std::size_t y, const Vector& chi);
/// Loop side: G^{xy} exp(-<L_1 + occupation of the bridge, chi>).
double dynkin_loop_sample(const LoopEnsemble& soup, const Path& bridge, double g_xy, const Vector& chi);

/// Renormalized power of v = |phi_x|^2 / 2 with variance scale sigma = G^{xx}:
/// (-1)^n n! sigma^n L_n(v / sigma). Requires 0 <= n <= 8.
double wick_power(double v, double sigma, int n);

/// H^F f: expected value of f at the first hitting point of F.
Vector harmonic_extension(const EnergyForm& e, const VertexSet& f_set, const Vector& f_values);

/// log of the density of (phi + f) relative to phi at the real field value:
/// <(M_lambda - C) f, phi> - 1/2 f^T (M_lambda - C) f.
double shift_log_density(const EnergyForm& e, const Vector& f, const Vector& phi);

/// Occupation of a path (sum of holdings per vertex of X).
Vector path_occupation(const Path& p, std::size_t n);

}  // namespace loopsoup
