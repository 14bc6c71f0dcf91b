#include "loopsoup/energy_form.hpp"

#include <cmath>
#include <set>

namespace loopsoup {

EnergyForm::EnergyForm(std::vector<std::string> names, Matrix conductance, Vector killing)
    : names_(std::move(names)), conductance_(std::move(conductance)), killing_(std::move(killing)) {
  const auto n = static_cast<Eigen::Index>(names_.size());
  if (n == 0) throw ModelError("energy form needs at least one vertex");
  if (conductance_.rows() != n || conductance_.cols() != n || killing_.size() != n)
    throw ModelError("energy form dimensions do not match the vertex list");
  std::set<std::string> seen;
  for (const auto& s : names_)
    if (!seen.insert(s).second) throw ModelError("duplicate vertex '" + s + "'");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (conductance_(i, i) != 0.0) throw ModelError("conductance diagonal must be zero");
    if (!(killing_(i) >= 0.0) || !std::isfinite(killing_(i)))
      throw ModelError("killing measure must be nonnegative");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(conductance_(i, j) >= 0.0) || !std::isfinite(conductance_(i, j)))
        throw ModelError("conductances must be nonnegative");
      if (conductance_(i, j) != conductance_(j, i))
        throw ModelError("conductance matrix must be symmetric");
    }
  }
  lambda_ = killing_ + conductance_.rowwise().sum();
  try {
    (void)log_det_spd(operator_matrix());
  } catch (const std::domain_error&) {
    throw ModelError("singular energy form");
  }
}

EnergyForm EnergyForm::build(const std::vector<std::string>& vertices,
                             const std::vector<ConductanceEntry>& conductances,
                             const std::map<std::string, double>& killing) {
  const auto n = static_cast<Eigen::Index>(vertices.size());
  std::map<std::string, Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i) idx[vertices[static_cast<std::size_t>(i)]] = i;
  auto lookup = [&](const std::string& s) {
    auto it = idx.find(s);
    if (it == idx.end()) throw ModelError("unknown vertex '" + s + "'");
    return it->second;
  };
  Matrix c = Matrix::Zero(n, n);
  for (const auto& entry : conductances) {
    const auto i = lookup(entry.u), j = lookup(entry.v);
    if (i == j) throw ModelError("conductance diagonal must be zero (vertex '" + entry.u + "')");
    if (c(i, j) != 0.0) throw ModelError("duplicate edge " + entry.u + "-" + entry.v);
    if (!(entry.value > 0.0) || !std::isfinite(entry.value))
      throw ModelError("conductances must be positive on listed edges");
    c(i, j) = c(j, i) = entry.value;
  }
  Vector k = Vector::Zero(n);
  for (const auto& [name, value] : killing) k(lookup(name)) = value;
  return EnergyForm(vertices, std::move(c), std::move(k));
}

const std::string& EnergyForm::name(std::size_t i) const {
  static const std::string kDeltaName = "Delta";
  if (i == delta()) return kDeltaName;
  return names_.at(i);
}

std::optional<std::size_t> EnergyForm::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

std::size_t EnergyForm::index(const std::string& name) const {
  auto i = find(name);
  if (!i) throw ModelError("unknown vertex '" + name + "'");
  return *i;
}

double EnergyForm::conductance(std::size_t x, std::size_t y) const {
  if (x == delta() && y == delta()) return 0.0;
  if (y == delta()) return killing_(static_cast<Eigen::Index>(x));
  if (x == delta()) return killing_(static_cast<Eigen::Index>(y));
  return conductance_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
}

Matrix EnergyForm::operator_matrix() const {
  Matrix m = -conductance_;
  m.diagonal() += lambda_;
  return m;
}

EnergyForm EnergyForm::restricted(const VertexSet& d) const {
  if (d.empty()) throw ModelError("restriction to an empty set");
  std::vector<std::string> names;
  for (auto i : d) names.push_back(names_.at(i));
  Matrix c = principal(conductance_, d);
  // Killing absorbs the conductance toward the complement.
  Vector k = restrict(lambda_, d) - c.rowwise().sum();
  k = k.cwiseMax(0.0);
  return EnergyForm(std::move(names), std::move(c), std::move(k));
}

EnergyForm EnergyForm::with_conductance_keep_lambda(const Matrix& c) const {
  Vector k = lambda_ - c.rowwise().sum();
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    if (k(i) < -1e-12 * lambda_(i)) throw ModelError("new conductances exceed lambda");
    k(i) = std::max(k(i), 0.0);
  }
  return EnergyForm(names_, c, std::move(k));
}

EnergyForm EnergyForm::permuted(const std::vector<std::size_t>& perm) const {
  const auto n = size();
  if (perm.size() != n) throw ModelError("permutation size mismatch");
  std::vector<std::string> names(n);
  Matrix c(conductance_.rows(), conductance_.cols());
  Vector k(killing_.size());
  for (std::size_t i = 0; i < n; ++i) {
    names.at(perm[i]) = names_[i];
    k(static_cast<Eigen::Index>(perm[i])) = killing_(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < n; ++j)
      c(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])) =
          conductance_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return EnergyForm(std::move(names), std::move(c), std::move(k));
}

bool EnergyForm::operator==(const EnergyForm& other) const {
  return names_ == other.names_ && conductance_ == other.conductance_ && killing_ == other.killing_;
}

Current::Current(Matrix omega) : omega_(std::move(omega)) {
  if (omega_.rows() != omega_.cols() || omega_.rows() == 0)
    throw ModelError("current must be a square matrix over X and the cemetery");
  if (max_abs(omega_ + omega_.transpose()) != 0.0) throw ModelError("current must be antisymmetric");
}

void Current::set(std::size_t x, std::size_t y, double value) {
  if (x == y) throw ModelError("current on a diagonal entry");
  omega_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = value;
  omega_(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = -value;
}

Current Current::scaled(double s) const { return Current(Matrix(omega_ * s)); }

void Current::check_support(const EnergyForm& e) const {
  if (size() != e.size()) throw ModelError("current dimension does not match the energy form");
  for (std::size_t x = 0; x <= e.size(); ++x)
    for (std::size_t y = 0; y <= e.size(); ++y)
      if (omega_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) != 0.0 &&
          e.conductance(x, y) <= 0.0)
        throw ModelError("current supported off the links of the energy form");
}

}  // namespace loopsoup
