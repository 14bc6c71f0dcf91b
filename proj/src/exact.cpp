#include "loopsoup/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <queue>
#include <sstream>

namespace loopsoup {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ModelError("alpha must be positive");
}

// log det G^D, 0 for the empty set.
double log_det_killed(const EnergyForm& e, const VertexSet& d) {
  if (d.empty()) return 0.0;
  return -log_det_spd(principal(e.operator_matrix(), d));
}

double sum_log_lambda(const EnergyForm& e, const VertexSet& s) {
  double acc = 0.0;
  for (auto x : s) acc += std::log(e.lambda()(ix(x)));
  return acc;
}

// mu^D(p > 1) = -log det((I - P)|_D).
double loop_mass_on(const EnergyForm& e, const VertexSet& d) {
  if (d.empty()) return 0.0;
  return log_det_killed(e, d) + sum_log_lambda(e, d);
}

VertexSet all_vertices(const EnergyForm& e) {
  VertexSet v(e.size());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

std::uint64_t digest(const EnergyForm& e) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& s : e.names()) mix(s.data(), s.size() + 1);
  mix(e.conductance().data(), sizeof(double) * static_cast<std::size_t>(e.conductance().size()));
  mix(e.killing().data(), sizeof(double) * static_cast<std::size_t>(e.killing().size()));
  return h;
}

double log_zeta(const EnergyForm& e) { return -log_det_spd(e.operator_matrix()); }

double zeta(const EnergyForm& e) { return std::exp(log_zeta(e)); }

double loop_mass_nontrivial(const EnergyForm& e) {
  return std::max(0.0, loop_mass_on(e, all_vertices(e)));
}

LaplaceRoutes occupation_laplace_routes(const EnergyForm& e, const Vector& chi, double alpha) {
  check_alpha(alpha);
  const auto n = ix(e.size());
  const Matrix g = green(e).matrix;
  const Matrix gchi = green_chi(e, chi).matrix;
  const Matrix id = Matrix::Identity(n, n);
  LaplaceRoutes r;
  r.via_green = -alpha * log_det(Matrix(id + g * chi.asDiagonal())).log_abs;
  r.via_resolvent = alpha * log_det(Matrix(id - gchi * chi.asDiagonal())).log_abs;
  r.via_ratio = alpha * (log_det_spd(gchi) - log_det_spd(g));
  return r;
}

double occupation_laplace_exact(const EnergyForm& e, const Vector& chi, double alpha) {
  const auto r = occupation_laplace_routes(e, chi, alpha);
  const double a = std::exp(r.via_green), b = std::exp(r.via_resolvent), c = std::exp(r.via_ratio);
  if (!rel_close(b, a, 1e-10) || !rel_close(c, a, 1e-10))
    throw IdentityMismatch("occupation Laplace routes disagree");
  return a;
}

double avoidance_probability(const EnergyForm& e, const VertexSet& f, double alpha) {
  check_alpha(alpha);
  const VertexSet ff = normalize_subset(e.size(), f);
  if (ff.empty()) throw ModelError("avoidance needs a nonempty set");
  const Matrix gf = principal(green(e).matrix, ff);
  const double log_inner = sum_log_lambda(e, ff) + log_det_spd(gf);
  return std::exp(-alpha * log_inner);
}

double visit_probability(const EnergyForm& e, std::size_t x, double alpha) {
  return 1.0 - avoidance_probability(e, VertexSet{x}, alpha);
}

double joint_visit_probability(const EnergyForm& e, std::size_t x, std::size_t y, double alpha) {
  check_alpha(alpha);
  return -std::expm1(-alpha * joint_visit_log_mass(e, {VertexSet{x}, VertexSet{y}}));
}

double joint_visit_log_mass(const EnergyForm& e, const std::vector<VertexSet>& sets) {
  const auto n = e.size();
  const std::size_t k = sets.size();
  if (k == 0) throw ModelError("joint visit mass needs at least one set");
  if (k > 20) throw ModelError("too many sets for inclusion-exclusion");
  std::vector<int> owner(n, -1);
  std::vector<VertexSet> fs;
  for (std::size_t i = 0; i < k; ++i) {
    fs.push_back(normalize_subset(n, sets[i]));
    if (fs.back().empty()) throw ModelError("joint visit sets must be nonempty");
    for (auto x : fs.back()) {
      if (owner[x] != -1) throw ModelError("joint visit sets must be disjoint");
      owner[x] = static_cast<int>(i);
    }
  }
  // sum_S (-1)^|S| mu^{D_S}(p > 1), D_S = X minus the union of F_i, i in S.
  double acc = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    VertexSet d;
    for (std::size_t x = 0; x < n; ++x)
      if (owner[x] < 0 || !(mask & (1u << owner[x]))) d.push_back(x);
    const double sign = (std::popcount(mask) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * loop_mass_on(e, d);
  }
  return acc;
}

double alpha_permanent(const Matrix& m, double alpha) {
  const auto k = static_cast<std::size_t>(m.rows());
  if (m.rows() != m.cols()) throw ModelError("alpha-permanent needs a square matrix");
  if (k > 10) throw ModelError("alpha-permanent limited to k <= 10");
  if (k == 0) return 1.0;
  std::vector<std::size_t> sigma(k);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::vector<double> alpha_pow(k + 1, 1.0);
  for (std::size_t i = 1; i <= k; ++i) alpha_pow[i] = alpha_pow[i - 1] * alpha;
  std::vector<char> seen(k);
  double total = 0.0;
  do {
    double prod = 1.0;
    for (std::size_t i = 0; i < k && prod != 0.0; ++i) prod *= m(ix(i), ix(sigma[i]));
    if (prod == 0.0) continue;
    std::fill(seen.begin(), seen.end(), 0);
    std::size_t cycles = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (seen[i]) continue;
      ++cycles;
      for (std::size_t j = i; !seen[j]; j = sigma[j]) seen[j] = 1;
    }
    total += alpha_pow[cycles] * prod;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

double occupation_moment_exact(const EnergyForm& e, const Vector& chi, int k, double alpha) {
  check_alpha(alpha);
  if (k < 0 || k > 6) throw ModelError("occupation moments limited to k <= 6");
  if (chi.size() != ix(e.size())) throw ModelError("chi has the wrong dimension");
  if (k == 0) return 1.0;
  const Matrix g = green(e).matrix;
  VertexSet support;
  for (std::size_t x = 0; x < e.size(); ++x)
    if (chi(ix(x)) != 0.0) support.push_back(x);
  if (support.empty()) return 0.0;

  // Sum over nondecreasing index tuples weighted by their multinomial count;
  // the alpha-permanent depends only on the multiset.
  std::vector<double> factorial(static_cast<std::size_t>(k) + 1, 1.0);
  for (int i = 1; i <= k; ++i) factorial[static_cast<std::size_t>(i)] = factorial[static_cast<std::size_t>(i) - 1] * i;
  std::vector<std::size_t> tuple(static_cast<std::size_t>(k));
  double total = 0.0;
  auto visit = [&](auto&& self, std::size_t pos, std::size_t start) -> void {
    if (pos == tuple.size()) {
      double weight = factorial.back();
      double chi_prod = 1.0;
      std::size_t run = 1;
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        chi_prod *= chi(ix(tuple[i]));
        if (i > 0 && tuple[i] == tuple[i - 1]) {
          ++run;
        } else {
          run = 1;
        }
        if (i + 1 == tuple.size() || tuple[i + 1] != tuple[i]) weight /= factorial[run];
      }
      total += weight * chi_prod * alpha_permanent(principal(g, tuple), alpha);
      return;
    }
    for (std::size_t j = start; j < support.size(); ++j) {
      tuple[pos] = support[j];
      self(self, pos + 1, j);
    }
  };
  visit(visit, 0, 0);
  return total;
}

double nvisit_generating_exact(const EnergyForm& e, const std::vector<std::size_t>& points,
                               const std::vector<double>& s, double alpha) {
  check_alpha(alpha);
  if (points.size() != s.size() || points.empty())
    throw ModelError("need one generating variable per point");
  if (normalize_subset(e.size(), points).size() != points.size())
    throw ModelError("generating-function points must be distinct");
  for (double si : s)
    if (!(si > 0.0 && si <= 1.0)) throw ModelError("generating variables must lie in (0, 1]");
  const Matrix g = green(e).matrix;
  const auto k = ix(points.size());
  Vector w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double si = s[static_cast<std::size_t>(i)];
    w(i) = std::sqrt(e.lambda()(ix(points[static_cast<std::size_t>(i)])) * (1.0 - si) / si);
  }
  Matrix a = w.asDiagonal() * principal(g, points) * w.asDiagonal();
  a.diagonal().array() += 1.0;
  return std::exp(-alpha * log_det_spd(a));
}

double edge_count_generating(const EnergyForm& e, std::size_t x, std::size_t y, double s) {
  const auto n = ix(e.size());
  Matrix p = transition_matrix(e);
  p(ix(x), ix(y)) *= s;
  const auto ld = log_det(Matrix(Matrix::Identity(n, n) - p));
  if (ld.sign <= 0.0) throw ModelError("I - P(s) is not positive");
  return -ld.log_abs;
}

Complex current_laplace_exact(const EnergyForm& e, const Current& omega, double alpha) {
  check_alpha(alpha);
  const auto n = ix(e.size());
  CMatrix m(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      m(x, y) = -e.conductance()(x, y) * std::polar(1.0, omega.matrix()(x, y));
  for (Eigen::Index x = 0; x < n; ++x) m(x, x) += e.lambda()(x);
  const Complex log_ratio = Complex(-log_zeta(e), 0.0) - log_det(m);
  // The ratio is real; the log may carry a 2*pi*i branch offset.
  const double im = std::remainder(log_ratio.imag(), 2.0 * M_PI);
  if (std::abs(im) > 1e-10) throw IdentityMismatch("twisted determinant ratio is not real");
  return std::exp(Complex(alpha * log_ratio.real(), 0.0));
}

void check_integer_winding(const EnergyForm& e, const Current& omega) {
  const auto n = e.size();
  if (omega.size() != n) throw ModelError("current dimension does not match the energy form");
  std::vector<double> potential(n, 0.0);
  std::vector<int> parent(n, -2);
  for (std::size_t root = 0; root < n; ++root) {
    if (parent[root] != -2) continue;
    parent[root] = -1;
    std::queue<std::size_t> q;
    q.push(root);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (std::size_t v = 0; v < n; ++v) {
        if (e.conductance()(ix(u), ix(v)) <= 0.0 || parent[v] != -2) continue;
        parent[v] = static_cast<int>(u);
        potential[v] = potential[u] + omega(u, v);
        q.push(v);
      }
    }
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) {
      if (e.conductance()(ix(u), ix(v)) <= 0.0) continue;
      if (parent[v] == static_cast<int>(u) || parent[u] == static_cast<int>(v)) continue;
      const double cycle = potential[u] + omega(u, v) - potential[v];
      if (std::abs(cycle - std::round(cycle)) > 1e-9) {
        std::ostringstream msg;
        msg << "non-integer winding " << cycle << " on the cycle closed by " << e.name(u) << "-" << e.name(v);
        throw ModelError(msg.str());
      }
    }
}

double winding_nonzero_mass(const EnergyForm& e, const Current& omega) {
  check_integer_winding(e, omega);
  const double base = -log_zeta(e);
  const auto n = ix(e.size());
  auto integrand = [&](double u) {
    CMatrix m(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        m(x, y) = -e.conductance()(x, y) * std::polar(1.0, 2.0 * M_PI * u * omega.matrix()(x, y));
    for (Eigen::Index x = 0; x < n; ++x) m(x, x) += e.lambda()(x);
    return base - log_det(m).real();
  };
  auto simpson = [&](int panels) {
    const double h = 1.0 / panels;
    double acc = integrand(0.0) + integrand(1.0);
    for (int i = 1; i < panels; ++i) acc += integrand(i * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    return acc * h / 3.0;
  };
  int panels = 64;
  double prev = simpson(panels);
  for (;;) {
    panels *= 2;
    const double next = simpson(panels);
    if (std::abs(next - prev) < 1e-8 || panels >= (1 << 16)) {
      prev = next;
      break;
    }
    prev = next;
  }
  return std::max(0.0, -prev);
}

double log_zeta_ratio(const EnergyForm& e, const EnergyForm& e_prime) {
  if (e.size() != e_prime.size()) throw ModelError("energy forms live on different vertex sets");
  return log_zeta(e_prime) - log_zeta(e);
}

EnergyForm avoided_links(const EnergyForm& e, const std::vector<Link>& links) {
  Matrix c = e.conductance();
  for (const auto& l : links) {
    if (l.from >= e.size() || l.to >= e.size()) throw ModelError("avoided links must join vertices of X");
    c(ix(l.from), ix(l.to)) = 0.0;
    c(ix(l.to), ix(l.from)) = 0.0;
  }
  return e.with_conductance_keep_lambda(c);
}

double link_avoidance_probability(const EnergyForm& e, const std::vector<Link>& links, double alpha) {
  check_alpha(alpha);
  return std::exp(alpha * log_zeta_ratio(e, avoided_links(e, links)));
}

LinkLaplace link_laplace_exact(const EnergyForm& e, const Matrix& g, double alpha) {
  check_alpha(alpha);
  const auto n = e.size();
  if (g.rows() != ix(n) || g.cols() != ix(n)) throw ModelError("g must be indexed by X x X");
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (e.conductance()(ix(x), ix(y)) <= 0.0) continue;
      if (!(g(ix(x), ix(y)) >= 0.0)) throw ModelError("g must be nonnegative on links of X");
      if (g(ix(x), ix(y)) != g(ix(y), ix(x))) throw ModelError("g must be symmetric");
    }
  Matrix damped = e.conductance();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (damped(ix(x), ix(y)) > 0.0) damped(ix(x), ix(y)) *= std::exp(-g(ix(x), ix(y)));
  Matrix m = -damped;
  m.diagonal() += e.lambda();
  LinkLaplace out;
  out.canonical = std::exp(-alpha * (log_det_spd(m) - log_det_spd(e.operator_matrix())));

  // K-form over X-links with Tg = C(1 - e^-g) and every (x, Delta) with
  // Tg = sum_z C_xz (e^-g - 1).
  std::vector<Link> links;
  std::vector<double> weights;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (e.conductance()(ix(x), ix(y)) > 0.0) {
        links.push_back({x, y});
        weights.push_back(e.conductance()(ix(x), ix(y)) - damped(ix(x), ix(y)));
      }
  for (std::size_t x = 0; x < n; ++x) {
    links.push_back({x, n});
    weights.push_back(damped.row(ix(x)).sum() - e.conductance().row(ix(x)).sum());
  }
  const TransferMatrix k = transfer_matrix(e, links);
  const Vector w = Eigen::Map<const Vector>(weights.data(), ix(weights.size()));
  const Matrix a = Matrix::Identity(k.matrix.rows(), k.matrix.cols()) - k.matrix * w.asDiagonal();
  const auto ld = log_det(a);
  out.k_form = ld.sign > 0.0 ? std::exp(-alpha * ld.log_abs) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

double tree_link_laplace_exact(const EnergyForm& e, const Matrix& g) {
  const auto n = e.size();
  if (g.rows() != ix(n + 1) || g.cols() != ix(n + 1))
    throw ModelError("g must be indexed by X and the cemetery");
  const TransferMatrix k = transfer_matrix(e);
  Vector w(ix(k.links.size()));
  for (std::size_t i = 0; i < k.links.size(); ++i) {
    const auto [x, y] = k.links[i];
    if (g(ix(x), ix(y)) != g(ix(y), ix(x))) throw ModelError("g must be symmetric");
    w(ix(i)) = e.conductance(x, y) * (std::exp(-g(ix(x), ix(y))) - 1.0);
  }
  const Matrix a = Matrix::Identity(k.matrix.rows(), k.matrix.cols()) + k.matrix * w.asDiagonal();
  return log_det(a).value();
}

bool ZetaFactorization::holds(double tol) const {
  return rel_close(zeta_killed * zeta_traced, zeta, tol);
}

ZetaFactorization zeta_factorization_check(const EnergyForm& e, const VertexSet& f) {
  const VertexSet ff = normalize_subset(e.size(), f);
  if (ff.empty()) throw ModelError("factorization needs a nonempty F");
  const VertexSet d = complement(e.size(), ff);
  ZetaFactorization z;
  z.zeta = zeta(e);
  z.zeta_killed = std::exp(log_det_killed(e, d));
  z.zeta_traced = zeta(trace_energy(e, ff));
  return z;
}

}  // namespace loopsoup
