#include "loopsoup/kernels.hpp"

#include <cmath>

namespace loopsoup {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

Matrix spd_inverse(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw ModelError("singular energy form");
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

double extended_green(const Matrix& g, std::size_t n, std::size_t x, std::size_t y) {
  if (x == n || y == n) return 0.0;
  return g(ix(x), ix(y));
}

}  // namespace

Matrix transition_matrix(const EnergyForm& e) {
  return e.lambda().cwiseInverse().asDiagonal() * e.conductance();
}

GreenKernel green(const EnergyForm& e) {
  GreenKernel k;
  k.matrix = spd_inverse(e.operator_matrix());
  k.kind = KernelKind::kPlain;
  for (std::size_t i = 0; i < e.size(); ++i) k.support.push_back(i);
  return k;
}

GreenKernel green_chi(const EnergyForm& e, const Vector& chi) {
  if (chi.size() != ix(e.size())) throw ModelError("chi has the wrong dimension");
  if ((chi.array() < 0.0).any()) throw ModelError("chi must be nonnegative");
  Matrix m = e.operator_matrix();
  m.diagonal() += chi;
  GreenKernel k;
  k.matrix = spd_inverse(m);
  k.kind = KernelKind::kChiPerturbed;
  for (std::size_t i = 0; i < e.size(); ++i) k.support.push_back(i);
  return k;
}

GreenKernel green_killed(const EnergyForm& e, const VertexSet& d) {
  const VertexSet dd = normalize_subset(e.size(), d);
  if (dd.empty()) throw ModelError("killed Green function needs a nonempty set");
  GreenKernel k;
  k.matrix = spd_inverse(principal(e.operator_matrix(), dd));
  k.kind = KernelKind::kKilled;
  k.support = dd;
  return k;
}

Matrix hitting_matrix(const EnergyForm& e, const VertexSet& f) {
  const VertexSet ff = normalize_subset(e.size(), f);
  if (ff.empty()) throw ModelError("hitting matrix needs a nonempty set");
  const auto n = e.size();
  Matrix h = Matrix::Zero(ix(n), ix(ff.size()));
  for (std::size_t j = 0; j < ff.size(); ++j) h(ix(ff[j]), ix(j)) = 1.0;
  const VertexSet d = complement(n, ff);
  if (d.empty()) return h;
  const Matrix gd = green_killed(e, d).matrix;
  // [H]_y^x = sum_{b in D} G^D_{xb} C_{by} for x in D.
  Matrix c_df(ix(d.size()), ix(ff.size()));
  for (std::size_t b = 0; b < d.size(); ++b)
    for (std::size_t j = 0; j < ff.size(); ++j) c_df(ix(b), ix(j)) = e.conductance()(ix(d[b]), ix(ff[j]));
  const Matrix hd = gd * c_df;
  for (std::size_t a = 0; a < d.size(); ++a) h.row(ix(d[a])) = hd.row(ix(a));
  return h;
}

Vector resurrected_green(const EnergyForm& e, const Vector& mu) {
  const auto n = e.size();
  if (mu.size() != ix(n + 1)) throw ModelError("measure must live on X and the cemetery");
  const double total = mu.sum();
  if (std::abs(total) > 1e-12 * std::max(1.0, mu.cwiseAbs().sum()))
    throw ModelError("resurrected potential needs a measure of total charge zero");
  const Matrix g = green(e).matrix;
  const Vector gmu = g * mu.head(ix(n));
  const double lambda_total = e.lambda().sum() + e.killing().sum();
  const double at_delta = -e.lambda().dot(gmu) / lambda_total;
  Vector out(ix(n + 1));
  out.head(ix(n)) = gmu.array() + at_delta;
  out(ix(n)) = at_delta;
  return out;
}

std::vector<Link> default_links(const EnergyForm& e) {
  std::vector<Link> links;
  const auto n = e.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (e.conductance()(ix(x), ix(y)) > 0.0) links.push_back({x, y});
  for (std::size_t x = 0; x < n; ++x)
    if (e.killing()(ix(x)) > 0.0) links.push_back({x, n});
  return links;
}

TransferMatrix transfer_matrix(const EnergyForm& e) { return transfer_matrix(e, default_links(e)); }

TransferMatrix transfer_matrix(const EnergyForm& e, std::vector<Link> links) {
  const auto n = e.size();
  const Matrix g = green(e).matrix;
  for (const auto& l : links)
    if (l.from > n || l.to > n || l.from == l.to) throw ModelError("invalid link in transfer matrix");
  const auto k = ix(links.size());
  TransferMatrix t;
  t.matrix.resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto [x, y] = links[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto [u, v] = links[static_cast<std::size_t>(j)];
      t.matrix(i, j) = extended_green(g, n, x, u) + extended_green(g, n, y, v) -
                       extended_green(g, n, x, v) - extended_green(g, n, y, u);
    }
  }
  t.links = std::move(links);
  return t;
}

double transfer_entry_resurrected(const EnergyForm& e, Link a, Link b) {
  Vector mu = Vector::Zero(ix(e.size() + 1));
  mu(ix(a.from)) += 1.0;
  mu(ix(a.to)) -= 1.0;
  const Vector pot = resurrected_green(e, mu);
  return pot(ix(b.from)) - pot(ix(b.to));
}

CMatrix twisted_green(const EnergyForm& e, const Current& omega) {
  const auto n = ix(e.size());
  if (omega.size() != e.size()) throw ModelError("current dimension does not match the energy form");
  CMatrix m(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      m(x, y) = -e.conductance()(x, y) * std::polar(1.0, omega.matrix()(x, y));
  for (Eigen::Index x = 0; x < n; ++x) m(x, x) += e.lambda()(x);
  return m.partialPivLu().inverse();
}

EnergyForm trace_energy(const EnergyForm& e, const VertexSet& f) {
  const VertexSet ff = normalize_subset(e.size(), f);
  if (ff.empty()) throw ModelError("trace needs a nonempty set");
  const VertexSet d = complement(e.size(), ff);
  std::vector<std::string> names;
  for (auto i : ff) names.push_back(e.name(i));
  Matrix c = principal(e.conductance(), ff);
  Vector lambda = restrict(e.lambda(), ff);
  if (!d.empty()) {
    const Matrix gd = green_killed(e, d).matrix;
    Matrix c_fd(ix(ff.size()), ix(d.size()));
    for (std::size_t i = 0; i < ff.size(); ++i)
      for (std::size_t a = 0; a < d.size(); ++a) c_fd(ix(i), ix(a)) = e.conductance()(ix(ff[i]), ix(d[a]));
    const Matrix excursions = c_fd * gd * c_fd.transpose();
    c += excursions;
    lambda -= excursions.diagonal();
    c.diagonal().setZero();
  }
  // Exact symmetry for the EnergyForm invariants.
  c = (0.5 * (c + c.transpose())).eval();
  Vector kappa = lambda - c.rowwise().sum();
  for (Eigen::Index i = 0; i < kappa.size(); ++i) {
    // Cancellation leaves O(eps) negatives when F's mass all flows through D.
    if (kappa(i) < 0.0) {
      if (kappa(i) < -1e-9 * lambda(i)) throw ModelError("traced killing measure is negative");
      kappa(i) = 0.0;
    }
  }
  return EnergyForm(std::move(names), std::move(c), std::move(kappa));
}

}  // namespace loopsoup
