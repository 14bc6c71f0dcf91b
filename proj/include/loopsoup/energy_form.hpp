#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopsoup/linalg.hpp"

namespace loopsoup {

/// Raised for invalid model input (bad conductances, singular forms, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConductanceEntry {
  std::string u;
  std::string v;
  double value = 0.0;
};

/// Finite energy form: symmetric conductances C with zero diagonal and a
/// nonnegative killing measure kappa. Vertex i has total rate
/// lambda_i = kappa_i + sum_j C_ij. The cemetery point is the index size().
///
/// Construction checks that M_lambda - C is positive definite (mass gap);
/// failure is reported as "singular energy form".
class EnergyForm {
 public:
  EnergyForm(std::vector<std::string> names, Matrix conductance, Vector killing);

  /// Vertices keep the order given in `vertices`.
  static EnergyForm build(const std::vector<std::string>& vertices,
                          const std::vector<ConductanceEntry>& conductances,
                          const std::map<std::string, double>& killing);

  std::size_t size() const { return names_.size(); }
  std::size_t delta() const { return names_.size(); }

  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const;
  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index(const std::string& name) const;  // throws ModelError

  const Matrix& conductance() const { return conductance_; }
  const Vector& killing() const { return killing_; }
  const Vector& lambda() const { return lambda_; }
  double conductance(std::size_t x, std::size_t y) const;  // y may be delta()

  /// M_lambda - C.
  Matrix operator_matrix() const;

  /// Restriction to D: the chain killed on leaving D (C|_{DxD}, same lambda).
  EnergyForm restricted(const VertexSet& d) const;

  /// Same vertex set, new conductances; kappa adjusted so lambda is unchanged.
  EnergyForm with_conductance_keep_lambda(const Matrix& c) const;

  /// Relabels vertex i as perm[i] (positions permuted, names carried along).
  EnergyForm permuted(const std::vector<std::size_t>& perm) const;

  bool operator==(const EnergyForm& other) const;

 private:
  std::vector<std::string> names_;
  Matrix conductance_;
  Vector killing_;
  Vector lambda_;
};

/// Antisymmetric link weights over X and the cemetery (index n).
class Current {
 public:
  explicit Current(std::size_t n) : omega_(Matrix::Zero(n + 1, n + 1)) {}
  explicit Current(Matrix omega);

  /// Sets omega(x,y) = value and omega(y,x) = -value.
  void set(std::size_t x, std::size_t y, double value);
  double operator()(std::size_t x, std::size_t y) const { return omega_(x, y); }
  const Matrix& matrix() const { return omega_; }
  std::size_t size() const { return static_cast<std::size_t>(omega_.rows()) - 1; }
  Current scaled(double s) const;

  /// Throws ModelError if omega is supported off the links of e.
  void check_support(const EnergyForm& e) const;

 private:
  Matrix omega_;
};

}  // namespace loopsoup
