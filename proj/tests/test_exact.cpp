#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "loopsoup/exact.hpp"
#include "loopsoup/kernels.hpp"
#include "test_support.hpp"

namespace loopsoup {
namespace {

using testing::g2;
using testing::k3;

constexpr double kTol = 1e-10;

// mu(p > 0) restricted to loops inside D, from the trace series sum_k Tr(P_D^k) / k.
double loop_mass_series(const EnergyForm& e, const VertexSet& d) {
  const Matrix p = principal(transition_matrix(e), d);
  Matrix pk = p;
  double m = 0.0;
  for (int k = 1; k < 5000; ++k) {
    m += pk.trace() / k;
    pk = pk * p;
  }
  return m;
}

VertexSet all(std::size_t n) {
  VertexSet v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

TEST(Zeta, FixtureValues) {
  EXPECT_NEAR(zeta(g2()), 1.0 / 3.0, kTol);
  EXPECT_NEAR(zeta(k3()), 1.0 / 16.0, kTol);
  EXPECT_NEAR(zeta(EnergyForm({"x"}, Matrix::Zero(1, 1), Vector::Ones(1))), 1.0, kTol);
}

TEST(LoopMass, FixtureValuesAndSeries) {
  EXPECT_NEAR(loop_mass_nontrivial(g2()), std::log(4.0 / 3.0), kTol);
  EXPECT_NEAR(loop_mass_nontrivial(k3()), std::log(27.0 / 16.0), kTol);
  EXPECT_NEAR(loop_mass_nontrivial(EnergyForm({"a", "b"}, Matrix::Zero(2, 2), Vector::Ones(2))), 0.0, kTol);
  const auto e = testing::random_form(7, 6);
  EXPECT_NEAR(loop_mass_nontrivial(e), loop_mass_series(e, all(6)), 1e-9);
}

TEST(OccupationLaplace, FixtureValues) {
  Vector chi(2);
  chi << 0.7, 0.0;
  EXPECT_NEAR(occupation_laplace_exact(g2(), chi, 1.0), 0.6818182, 1e-7);
  EXPECT_NEAR(occupation_laplace_exact(g2(), chi, 2.0), 0.4648760, 1e-7);
  EXPECT_NEAR(occupation_laplace_exact(g2(), chi, 1.0), 1.0 / (1.0 + 0.7 * 2.0 / 3.0), kTol);
  EXPECT_NEAR(occupation_laplace_exact(g2(), Vector::Zero(2), 1.5), 1.0, kTol);
}

TEST(OccupationLaplace, ThreeRoutesAgreeOnRandomForms) {
  Stream rng(11);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto e = testing::random_form(20 + s, 8);
    Vector chi(8);
    for (int i = 0; i < 8; ++i) chi(i) = 3.0 * rng.uniform();
    const double alpha = 0.3 + 2.0 * rng.uniform();
    const auto r = occupation_laplace_routes(e, chi, alpha);
    EXPECT_TRUE(rel_close(r.via_resolvent, r.via_green, kTol));
    EXPECT_TRUE(rel_close(r.via_ratio, r.via_green, kTol));
  }
}

TEST(Avoidance, FixtureValues) {
  EXPECT_NEAR(avoidance_probability(g2(), {0}, 1.0), 0.75, kTol);
  EXPECT_NEAR(avoidance_probability(k3(), {0}, 1.0), 2.0 / 3.0, kTol);
  EXPECT_NEAR(visit_probability(k3(), 0, 1.0), 1.0 / 3.0, kTol);
  EXPECT_NEAR(joint_visit_probability(k3(), 0, 1, 1.0), 0.25, kTol);
}

TEST(Avoidance, MatchesLoopMassSeries) {
  const auto e = testing::random_form(31, 7);
  const VertexSet f{1, 2, 5};
  const double visiting = loop_mass_series(e, all(7)) - loop_mass_series(e, complement(7, f));
  EXPECT_NEAR(avoidance_probability(e, f, 1.7), std::exp(-1.7 * visiting), 1e-9);
}

TEST(JointVisit, FixtureValuesAndSign) {
  EXPECT_NEAR(joint_visit_log_mass(k3(), {{0}, {1}}), std::log(4.0 / 3.0), kTol);
  const auto e = k3();
  EXPECT_NEAR(joint_visit_log_mass(e, {{0}}), loop_mass_nontrivial(e) - loop_mass_series(e, {1, 2}), 1e-9);
  EXPECT_THROW(joint_visit_log_mass(e, {{0, 1}, {1}}), ModelError);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto r = testing::random_form(40 + s, 6);
    EXPECT_GE(joint_visit_log_mass(r, {{0, 2}, {3}}), -kTol);
  }
}

TEST(AlphaPermanent, SmallCases) {
  Matrix m1(1, 1);
  m1 << 0.7;
  EXPECT_NEAR(alpha_permanent(m1, 2.5), 2.5 * 0.7, kTol);
  Matrix m2(2, 2);
  m2 << 0.3, 0.9, 0.9, 0.3;
  EXPECT_NEAR(alpha_permanent(m2, 1.7), 1.7 * 1.7 * 0.09 + 1.7 * 0.81, kTol);
  EXPECT_NEAR(alpha_permanent(Matrix::Ones(3, 3), 1.0), 6.0, kTol);
  EXPECT_THROW(alpha_permanent(Matrix::Ones(11, 11), 1.0), ModelError);
}

TEST(AlphaPermanent, OneIsThePermanent) {
  // Ryser's formula as an independent oracle.
  const auto e = testing::random_form(50, 5);
  const Matrix a = green(e).matrix;
  double per = 0.0;
  for (unsigned s = 1; s < 32; ++s) {
    double prod = 1.0;
    for (int i = 0; i < 5; ++i) {
      double row = 0.0;
      for (int j = 0; j < 5; ++j)
        if (s & (1u << j)) row += a(i, j);
      prod *= row;
    }
    per += ((5 - __builtin_popcount(s)) % 2 ? -1.0 : 1.0) * prod;
  }
  EXPECT_TRUE(rel_close(alpha_permanent(a, 1.0), per, kTol));
}

TEST(OccupationMoment, FixtureValues) {
  Vector d(2);
  d << 1.0, 0.0;
  EXPECT_NEAR(occupation_moment_exact(g2(), d, 1, 1.0), 2.0 / 3.0, kTol);
  EXPECT_NEAR(occupation_moment_exact(g2(), d, 2, 1.0), 8.0 / 9.0, kTol);
  EXPECT_NEAR(occupation_moment_exact(g2(), Vector::Zero(2), 1, 1.0), 0.0, kTol);
}

TEST(OccupationMoment, MatchesDerivativesOfLaplace) {
  const auto e = testing::random_form(60, 5);
  Vector chi(5);
  chi << 0.3, 1.1, 0.0, 0.7, 0.2;
  const double alpha = 1.3;
  auto f = [&](double t) { return occupation_laplace_exact(e, t * chi, alpha); };
  const double h1 = 1e-4;
  const double d1 = (-3 * f(0) + 4 * f(h1) - f(2 * h1)) / (2 * h1);
  EXPECT_NEAR(-d1, occupation_moment_exact(e, chi, 1, alpha), 1e-6);
  const double h2 = 1e-3;
  const double d2 = (2 * f(0) - 5 * f(h2) + 4 * f(2 * h2) - f(3 * h2)) / (h2 * h2);
  EXPECT_NEAR(d2, occupation_moment_exact(e, chi, 2, alpha), 1e-4);
}

TEST(NVisit, FixtureValues) {
  EXPECT_NEAR(nvisit_generating_exact(g2(), {0}, {0.5}, 1.0), 3.0 / 7.0, kTol);
  EXPECT_NEAR(nvisit_generating_exact(k3(), {0, 2}, {1.0, 1.0}, 2.0), 1.0, kTol);
  EXPECT_THROW(nvisit_generating_exact(g2(), {0}, {0.0}, 1.0), ModelError);
}

TEST(EdgeCount, GeneratingFunctionAtOneIsLoopMass) {
  const auto e = testing::random_form(70, 6);
  EXPECT_NEAR(edge_count_generating(e, 0, 1, 1.0), loop_mass_nontrivial(e), kTol);
}

TEST(FiniteDifference, LogZetaKillingDerivative) {
  const auto e = testing::random_form(80, 7);
  const Matrix g = green(e).matrix;
  const double h = 1e-5;
  for (int x = 0; x < 7; ++x) {
    Vector kp = e.killing(), km = e.killing();
    kp(x) += h;
    km(x) -= h;
    const double d =
        (log_zeta(EnergyForm(e.names(), e.conductance(), kp)) - log_zeta(EnergyForm(e.names(), e.conductance(), km))) / (2 * h);
    EXPECT_NEAR(d, -g(x, x), 1e-6);
  }
}

TEST(FiniteDifference, EdgeCountMean) {
  const auto e = k3();
  const double h = 1e-5;
  const double d = (edge_count_generating(e, 0, 1, 1 + h) - edge_count_generating(e, 0, 1, 1 - h)) / (2 * h);
  EXPECT_NEAR(d, 0.25, 1e-6);
}

TEST(CurrentLaplace, FixtureValues) {
  EXPECT_NEAR(current_laplace_exact(k3(), Current(3), 1.0).real(), 1.0, kTol);
  Current w(3);
  w.set(0, 1, std::numbers::pi);
  w.set(1, 2, std::numbers::pi);
  w.set(2, 0, std::numbers::pi);
  EXPECT_NEAR(current_laplace_exact(k3(), w, 1.0).real(), 0.8, kTol);
  Current v(2);
  v.set(0, 1, 1.234);
  EXPECT_NEAR(current_laplace_exact(g2(), v, 1.0).real(), 1.0, kTol);
}

TEST(Winding, ZeroAndExactCurrents) {
  const auto e = testing::sq1();
  EXPECT_NEAR(winding_nonzero_mass(e, Current(4)), 0.0, kTol);
  // Gradient current: every cycle integral vanishes.
  Current grad(4);
  const double f[4] = {0.0, 2.0, -1.0, 3.0};
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = x + 1; y < 4; ++y)
      if (e.conductance()(x, y) > 0) grad.set(x, y, f[y] - f[x]);
  EXPECT_NEAR(winding_nonzero_mass(e, grad), 0.0, 1e-9);
  Current quarter(3);
  quarter.set(0, 1, 0.25);
  EXPECT_THROW(check_integer_winding(k3(), quarter), ModelError);
}

TEST(Winding, SquareMatchesLoopEnumeration) {
  // Sum of mu over discrete loop classes of the square with winding != 0,
  // from the traces of the twisted transition matrix at integer winding numbers.
  const auto e = testing::sq1();
  Current w(4);
  w.set(0, 1, 0.25);
  w.set(1, 2, 0.25);
  w.set(2, 3, 0.25);
  w.set(3, 0, 0.25);
  // mu(winding = j) = sum_k (1/k) * (weight of based loops of length k winding j).
  // Count based loops by dynamic programming over (vertex, winding) with k up to 400.
  const Matrix p = transition_matrix(e);
  const int kmax = 400, wmax = 60;
  double mass = 0.0;
  for (int start = 0; start < 4; ++start) {
    std::vector<std::vector<double>> cur(4, std::vector<double>(2 * 4 * wmax + 1, 0.0));
    cur[start][4 * wmax] = 1.0;
    for (int k = 1; k <= kmax; ++k) {
      std::vector<std::vector<double>> next(4, std::vector<double>(2 * 4 * wmax + 1, 0.0));
      for (int x = 0; x < 4; ++x)
        for (int q = 1; q + 1 < 8 * wmax + 1; ++q) {
          if (cur[x][q] == 0.0) continue;
          next[(x + 1) % 4][q + 1] += cur[x][q] * p(x, (x + 1) % 4);
          next[(x + 3) % 4][q - 1] += cur[x][q] * p(x, (x + 3) % 4);
        }
      cur = std::move(next);
      double nonzero = 0.0;
      for (int q = 0; q < 8 * wmax + 1; ++q)
        if (q != 4 * wmax) nonzero += cur[start][q];
      mass += nonzero / k;
    }
  }
  EXPECT_NEAR(winding_nonzero_mass(e, w), mass, 1e-8);
}

TEST(LogZetaRatio, FixtureValues) {
  const auto e = g2();
  EXPECT_NEAR(log_zeta_ratio(e, e), 0.0, kTol);
  const auto avoided = avoided_links(e, {Link{0, 1}});
  EXPECT_NEAR(zeta(avoided), 0.25, kTol);
  EXPECT_NEAR(log_zeta_ratio(e, avoided), std::log(0.75), kTol);
  EXPECT_NEAR(link_avoidance_probability(e, {Link{0, 1}}, 1.0), 0.75, kTol);
  const auto k = k3();
  const auto scaled = k.with_conductance_keep_lambda(0.8 * k.conductance());
  const Matrix a = k.operator_matrix();
  const Matrix b = a + 0.2 * k.conductance();
  EXPECT_NEAR(log_zeta_ratio(k, scaled), std::log(a.determinant() / b.determinant()), kTol);
}

TEST(LinkLaplace, FixtureValues) {
  const auto e = g2();
  const auto zero = link_laplace_exact(e, Matrix::Zero(2, 2), 1.0);
  EXPECT_NEAR(zero.canonical, 1.0, kTol);
  EXPECT_NEAR(zero.k_form, 1.0, kTol);
  for (double t : {0.3, 2.0, 40.0}) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 1) = g(1, 0) = t;
    for (double alpha : {1.0, 2.5}) {
      const auto v = link_laplace_exact(e, g, alpha);
      EXPECT_NEAR(v.canonical, std::pow((4.0 - std::exp(-2 * t)) / 3.0, -alpha), kTol);
      EXPECT_LE(v.discrepancy(), kTol);
    }
  }
  Matrix neg = Matrix::Zero(2, 2);
  neg(0, 1) = neg(1, 0) = -1.0;
  EXPECT_THROW(link_laplace_exact(e, neg, 1.0), ModelError);
}

TEST(LinkLaplace, FormsAgreeOnRandomForms) {
  Stream rng(90);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto e = testing::random_form(90 + s, 7);
    Matrix g = Matrix::Zero(7, 7);
    for (int x = 0; x < 7; ++x)
      for (int y = x + 1; y < 7; ++y) g(x, y) = g(y, x) = 2.0 * rng.uniform();
    EXPECT_LE(link_laplace_exact(e, g, 1.4).discrepancy(), kTol);
  }
}

TEST(TreeLinkLaplace, FixtureValues) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(tree_link_laplace_exact(g2(), Matrix::Zero(3, 3)), 1.0, kTol);
  Matrix g = Matrix::Zero(3, 3);
  g(0, 1) = g(1, 0) = inf;
  EXPECT_NEAR(tree_link_laplace_exact(g2(), g), 1.0 / 3.0, kTol);
  Matrix h = Matrix::Zero(4, 4);
  h(0, 1) = h(1, 0) = inf;
  EXPECT_NEAR(tree_link_laplace_exact(k3(), h), 0.5, kTol);
}

TEST(ZetaFactorization, FixtureValues) {
  const auto z = zeta_factorization_check(k3(), {0, 1});
  EXPECT_NEAR(z.zeta, 1.0 / 16.0, kTol);
  EXPECT_NEAR(z.zeta_killed, 1.0 / 3.0, kTol);
  EXPECT_NEAR(z.zeta_traced, 3.0 / 16.0, kTol);
  EXPECT_TRUE(z.holds());
  const auto full = zeta_factorization_check(k3(), {0, 1, 2});
  EXPECT_NEAR(full.zeta_killed, 1.0, kTol);
  EXPECT_NEAR(full.zeta_traced, 1.0 / 16.0, kTol);
  const auto w = zeta_factorization_check(g2(), {0});
  EXPECT_NEAR(w.zeta, 1.0 / 3.0, kTol);
  EXPECT_NEAR(w.zeta_killed, 0.5, kTol);
  EXPECT_NEAR(w.zeta_traced, 2.0 / 3.0, kTol);
}

TEST(Digest, DependsOnInputs) {
  EXPECT_EQ(digest(g2()), digest(g2()));
  EXPECT_NE(digest(g2()), digest(k3()));
}

}  // namespace
}  // namespace loopsoup
