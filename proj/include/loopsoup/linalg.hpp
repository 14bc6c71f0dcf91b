#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace loopsoup {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Ordered set of vertex indices.
using VertexSet = std::vector<std::size_t>;

/// log det of a symmetric positive-definite matrix; throws
/// std::domain_error if the Cholesky factorization fails. The empty matrix has
/// log det 0.
double log_det_spd(const Matrix& a);

/// Sign and log|det| via partial-pivot LU.
struct SignedLogDet {
  double sign = 1.0;
  double log_abs = 0.0;
  double value() const;
};
SignedLogDet log_det(const Matrix& a);

/// Complex log det (principal branch of the sum of pivot logarithms).
Complex log_det(const CMatrix& a);

Matrix principal(const Matrix& a, std::span<const std::size_t> idx);
Vector restrict(const Vector& v, std::span<const std::size_t> idx);

/// Sorted complement of `set` within {0, ..., n-1}.
VertexSet complement(std::size_t n, std::span<const std::size_t> set);

/// Canonicalizes a subset: sorted, deduplicated, every index < n.
VertexSet normalize_subset(std::size_t n, std::span<const std::size_t> set);

double max_abs(const Matrix& a);

/// True when max|a - b| <= tol * max(1, |b|).
bool rel_close(double a, double b, double tol);

}  // namespace loopsoup
