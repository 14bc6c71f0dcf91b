#include "loopsoup/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loopsoup {

double log_det_spd(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("matrix is not positive definite");
  const auto& l = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = l(i, i);
    if (!(d > 0.0)) throw std::domain_error("matrix is not positive definite");
    s += std::log(d);
  }
  return 2.0 * s;
}

double SignedLogDet::value() const { return sign * std::exp(log_abs); }

SignedLogDet log_det(const Matrix& a) {
  SignedLogDet out;
  if (a.size() == 0) return out;
  Eigen::PartialPivLU<Matrix> lu(a);
  const auto& m = lu.matrixLU();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = m(i, i);
    if (d == 0.0) {
      out.sign = 0.0;
      out.log_abs = -std::numeric_limits<double>::infinity();
      return out;
    }
    if (d < 0.0) out.sign = -out.sign;
    out.log_abs += std::log(std::abs(d));
  }
  out.sign *= lu.permutationP().determinant();
  return out;
}

Complex log_det(const CMatrix& a) {
  if (a.size() == 0) return {0.0, 0.0};
  Eigen::PartialPivLU<CMatrix> lu(a);
  const auto& m = lu.matrixLU();
  Complex s{0.0, 0.0};
  for (Eigen::Index i = 0; i < a.rows(); ++i) s += std::log(m(i, i));
  if (lu.permutationP().determinant() < 0) s += Complex(0.0, M_PI);
  return s;
}

Matrix principal(const Matrix& a, std::span<const std::size_t> idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      out(i, j) = a(static_cast<Eigen::Index>(idx[i]), static_cast<Eigen::Index>(idx[j]));
  return out;
}

Vector restrict(const Vector& v, std::span<const std::size_t> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

VertexSet complement(std::size_t n, std::span<const std::size_t> set) {
  std::vector<bool> in(n, false);
  for (auto i : set) in.at(i) = true;
  VertexSet out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

VertexSet normalize_subset(std::size_t n, std::span<const std::size_t> set) {
  VertexSet out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (!out.empty() && out.back() >= n) throw std::out_of_range("vertex index out of range");
  return out;
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace loopsoup
