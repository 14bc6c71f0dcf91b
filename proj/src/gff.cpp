#include "loopsoup/gff.hpp"

#include <cmath>

#include "loopsoup/exact.hpp"
#include "loopsoup/kernels.hpp"

namespace loopsoup {

Vector GaussField::half_square() const { return 0.5 * values.cwiseAbs2(); }

FieldSampler::FieldSampler(const EnergyForm& e) {
  Eigen::LLT<Matrix> llt(green(e).matrix);
  if (llt.info() != Eigen::Success) throw ModelError("Green function is not positive definite");
  factor_ = llt.matrixL();
}

GaussField FieldSampler::sample(Stream& rng) const {
  const auto n = factor_.rows();
  Vector z1(n), z2(n);
  for (Eigen::Index i = 0; i < n; ++i) z1(i) = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) z2(i) = rng.normal();
  GaussField f;
  f.values = (factor_ * z1).cast<Complex>() + Complex(0.0, 1.0) * (factor_ * z2).cast<Complex>();
  return f;
}

Vector FieldSampler::sample_real(Stream& rng) const {
  const auto n = factor_.rows();
  Vector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.normal();
  return factor_ * z;
}

GaussField sample_field(const EnergyForm& e, Stream& rng) { return FieldSampler(e).sample(rng); }

double dynkin_exact(const EnergyForm& e, std::size_t x, std::size_t y, const Vector& chi) {
  const Matrix g_chi = green_chi(e, chi).matrix;
  const double ratio = occupation_laplace_exact(e, chi, 1.0);
  return g_chi(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) * ratio;
}

double dynkin_field_sample(const GaussField& phi, std::size_t x, std::size_t y, const Vector& chi) {
  const auto i = static_cast<Eigen::Index>(x);
  const auto j = static_cast<Eigen::Index>(y);
  const double pair = 0.5 * (phi.values(i) * std::conj(phi.values(j))).real();
  return pair * std::exp(-phi.half_square().dot(chi));
}

double dynkin_loop_sample(const LoopEnsemble& soup, const Path& bridge, double g_xy, const Vector& chi) {
  const auto n = static_cast<std::size_t>(chi.size());
  const Vector total = occupation_field(soup).values + path_occupation(bridge, n);
  return g_xy * std::exp(-total.dot(chi));
}

double wick_power(double v, double sigma, int n) {
  if (n < 0 || n > 8) throw ModelError("Wick power order must be in [0, 8]");
  if (!(sigma > 0.0)) throw ModelError("Wick power scale must be positive");
  const double t = v / sigma;
  double prev = 1.0;
  double cur = 1.0 - t;
  if (n == 0) return 1.0;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - t) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  double scale = 1.0;
  for (int k = 1; k <= n; ++k) scale *= k * sigma;
  return (n % 2 ? -1.0 : 1.0) * scale * cur;
}

Vector harmonic_extension(const EnergyForm& e, const VertexSet& f_set, const Vector& f_values) {
  const VertexSet f = normalize_subset(e.size(), f_set);
  if (f.size() != f_set.size() || static_cast<std::size_t>(f_values.size()) != f.size())
    throw ModelError("boundary values must match a set of distinct vertices");
  return hitting_matrix(e, f) * f_values;
}

double shift_log_density(const EnergyForm& e, const Vector& f, const Vector& phi) {
  const Matrix a = e.operator_matrix();
  const Vector af = a * f;
  return af.dot(phi) - 0.5 * f.dot(af);
}

Vector path_occupation(const Path& p, std::size_t n) {
  Vector occ = Vector::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < p.holdings.size(); ++i) occ(static_cast<Eigen::Index>(p.states[i])) += p.holdings[i];
  return occ;
}

}  // namespace loopsoup
