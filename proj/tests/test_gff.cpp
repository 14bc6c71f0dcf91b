#include <gtest/gtest.h>

#include <cmath>

#include "loopsoup/exact.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/kernels.hpp"
#include "test_support.hpp"

namespace loopsoup {
namespace {

using testing::g2;
using testing::k3;
using testing::same_mean;
using testing::within_stderr;

constexpr std::size_t kSamples = 100000;

TEST(Field, G2Covariance) {
  const FieldSampler s(g2());
  Stream rng(1);
  Accumulator aa, ab, re, im, pp;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto phi = s.sample(rng).values;
    aa.add(std::norm(phi(0)));
    ab.add((phi(0) * std::conj(phi(1))).real());
    re.add(phi(0).real());
    im.add(phi(0).imag());
    pp.add((phi(0) * phi(1)).real());
  }
  EXPECT_TRUE(within_stderr(aa.estimate(), 4.0 / 3.0));
  EXPECT_TRUE(within_stderr(ab.estimate(), 2.0 / 3.0));
  EXPECT_TRUE(within_stderr(re.estimate(), 0.0));
  EXPECT_TRUE(within_stderr(im.estimate(), 0.0));
  EXPECT_TRUE(within_stderr(pp.estimate(), 0.0));
}

TEST(Field, FactorReproducesGreen) {
  const auto e = testing::random_form(3, 7);
  const FieldSampler s(e);
  EXPECT_TRUE((s.factor() * s.factor().transpose()).isApprox(testing::neumann_green(e), 1e-9));
}

TEST(Field, RealPartCovariance) {
  const auto e = k3();
  const FieldSampler s(e);
  Stream rng(2);
  Accumulator ab;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const Vector v = s.sample_real(rng);
    ab.add(v(0) * v(1));
  }
  EXPECT_TRUE(within_stderr(ab.estimate(), green(e).matrix(0, 1)));
}

TEST(HalfSquare, LaplaceAndMoments) {
  const auto e = g2();
  const FieldSampler s(e);
  Vector chi(2);
  chi << 0.7, 0.0;
  Stream rng(3);
  Accumulator lap, m1, m2;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const Vector v = s.sample(rng).half_square();
    lap.add(std::exp(-v.dot(chi)));
    m1.add(v(0));
    m2.add(v(0) * v(0));
  }
  // Exponential law with mean 2/3.
  EXPECT_TRUE(within_stderr(lap.estimate(), 1.0 / (1.0 + 0.7 * 2.0 / 3.0)));
  EXPECT_NEAR(occupation_laplace_exact(e, chi, 1.0), 1.0 / (1.0 + 0.7 * 2.0 / 3.0), 1e-12);
  Vector da = Vector::Zero(2);
  da(0) = 1.0;
  EXPECT_TRUE(within_stderr(m1.estimate(), occupation_moment_exact(e, da, 1, 1.0)));
  EXPECT_TRUE(within_stderr(m2.estimate(), occupation_moment_exact(e, da, 2, 1.0)));
  GaussField zero{CVector::Zero(2)};
  EXPECT_EQ(zero.half_square(), Vector::Zero(2));
}

TEST(HalfSquare, SameLawAsSoupOccupation) {
  const auto e = k3();
  const FieldSampler field(e);
  const LoopSampler soup(e);
  const std::vector<Vector> chis = {Vector::Constant(3, 0.3), (Vector(3) << 0.9, 0.0, 0.0).finished(),
                                    (Vector(3) << 0.2, 0.5, 1.1).finished()};
  Stream r1(4), r2(5);
  std::vector<Accumulator> lf(3), ls(3), mf(3), ms(3);
  for (std::size_t i = 0; i < kSamples; ++i) {
    const Vector a = field.sample(r1).half_square();
    const Vector b = occupation_field(soup.sample_soup(1.0, r2)).values;
    for (std::size_t j = 0; j < 3; ++j) {
      lf[j].add(std::exp(-a.dot(chis[j])));
      ls[j].add(std::exp(-b.dot(chis[j])));
      mf[j].add(std::pow(a(0), static_cast<double>(j + 1)));
      ms[j].add(std::pow(b(0), static_cast<double>(j + 1)));
    }
  }
  Vector d0 = Vector::Zero(3);
  d0(0) = 1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_TRUE(same_mean(lf[j].estimate(), ls[j].estimate()));
    EXPECT_TRUE(within_stderr(lf[j].estimate(), occupation_laplace_exact(e, chis[j], 1.0)));
    EXPECT_TRUE(same_mean(mf[j].estimate(), ms[j].estimate()));
    EXPECT_TRUE(within_stderr(mf[j].estimate(), occupation_moment_exact(e, d0, static_cast<int>(j + 1), 1.0)));
  }
}

TEST(Dynkin, ExactAtZeroChiIsGreen) {
  const auto e = testing::random_form(6, 5);
  const Matrix g = green(e).matrix;
  for (std::size_t x = 0; x < 5; ++x)
    for (std::size_t y = 0; y < 5; ++y) EXPECT_NEAR(dynkin_exact(e, x, y, Vector::Zero(5)), g(x, y), 1e-12);
}

TEST(Dynkin, ExactIsGreenChiTimesDeterminantRatio) {
  const auto e = g2();
  Vector chi(2);
  chi << 0.7, 0.0;
  // 2x2 oracle: G_chi(a,a) = 2/4.4; det(G_chi G^-1) = det(M - C) / det(M - C + chi) = 3/4.4.
  EXPECT_NEAR(dynkin_exact(e, 0, 0, chi), (2.0 / 4.4) * (3.0 / 4.4), 1e-12);
}

TEST(Dynkin, FieldAndLoopSidesAgree) {
  const auto e = k3();
  const Vector chi = (Vector(3) << 0.5, 0.2, 0.0).finished();
  const double exact = dynkin_exact(e, 0, 1, chi);
  const double g01 = green(e).matrix(0, 1);
  const FieldSampler field(e);
  const LoopSampler soup(e);
  const BridgeSampler bridge(e, 1);
  Stream r1(7), r2(8);
  Accumulator f, l;
  for (std::size_t i = 0; i < kSamples; ++i) {
    f.add(dynkin_field_sample(field.sample(r1), 0, 1, chi));
    const auto ens = soup.sample_soup(1.0, r2);
    l.add(dynkin_loop_sample(ens, bridge.sample(0, r2), g01, chi));
  }
  EXPECT_TRUE(within_stderr(f.estimate(), exact));
  EXPECT_TRUE(within_stderr(l.estimate(), exact));
  EXPECT_TRUE(same_mean(f.estimate(), l.estimate()));
}

TEST(Wick, FixedValues) {
  EXPECT_DOUBLE_EQ(wick_power(1.7, 0.4, 0), 1.0);
  EXPECT_NEAR(wick_power(0.4, 0.4, 1), 0.0, 1e-15);
  EXPECT_NEAR(wick_power(0.0, 1.0, 2), 2.0, 1e-14);
  // W_2(v) = v^2 - 4 sigma v + 2 sigma^2 from L_2(t) = 1 - 2t + t^2/2.
  EXPECT_NEAR(wick_power(1.3, 0.6, 2), 1.3 * 1.3 - 4 * 0.6 * 1.3 + 2 * 0.36, 1e-13);
  EXPECT_ANY_THROW(wick_power(1.0, 1.0, 9));
  EXPECT_ANY_THROW(wick_power(1.0, 1.0, -1));
  EXPECT_ANY_THROW(wick_power(1.0, 0.0, 1));
}

// E[W_n W_m] under the exponential law with mean sigma, by Simpson on [0, 60 sigma].
TEST(Wick, OrthogonalUnderExponentialLaw) {
  const double sigma = 0.8;
  const int steps = 60000;
  const double h = 60.0 * sigma / steps;
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      double s = 0.0;
      for (int i = 0; i <= steps; ++i) {
        const double v = i * h;
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * wick_power(v, sigma, n) * wick_power(v, sigma, m) * std::exp(-v / sigma) / sigma;
      }
      s *= h / 3.0;
      const double expect = n == m ? std::pow(std::tgamma(n + 1.0), 2) * std::pow(sigma, 2 * n) : 0.0;
      EXPECT_NEAR(s, expect, 1e-8 * (1.0 + expect)) << n << "," << m;
    }
}

TEST(Wick, SampledOrthogonalityAndCentering) {
  const auto e = k3();
  const double sigma = green(e).matrix(0, 0);
  const FieldSampler s(e);
  Stream rng(9);
  Accumulator w1, w2, w12, w13, w23, centered, half_w1;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const double v = s.sample(rng).half_square()(0);
    const double a = wick_power(v, sigma, 1), b = wick_power(v, sigma, 2), c = wick_power(v, sigma, 3);
    w1.add(a);
    w2.add(b);
    w12.add(a * b);
    w13.add(a * c);
    w23.add(b * c);
    centered.add(v - sigma);
  }
  for (const auto& acc : {w1, w2, w12, w13, w23}) EXPECT_TRUE(within_stderr(acc.estimate(), 0.0));
  EXPECT_TRUE(within_stderr(centered.estimate(), 0.0));
}

TEST(Harmonic, Examples) {
  const auto e = k3();
  const Vector ones = harmonic_extension(e, {0, 1, 2}, Vector::Ones(3));
  EXPECT_TRUE(ones.isApprox(Vector::Ones(3), 1e-12));
  const Vector h = harmonic_extension(e, {0, 1}, (Vector(2) << 1.0, 0.0).finished());
  EXPECT_NEAR(h(0), 1.0, 1e-12);
  EXPECT_NEAR(h(1), 0.0, 1e-12);
  EXPECT_NEAR(h(2), 1.0 / 3.0, 1e-12);
}

TEST(Harmonic, ResidualIsUncorrelatedWithBoundary) {
  const auto e = testing::random_form(10, 7);
  const VertexSet f{1, 4, 5};
  const Matrix g = green(e).matrix;
  const Matrix hm = hitting_matrix(e, f);
  // cov(phi - H phi, phi_z) = G(., z) - H G(F, z) for z in F.
  for (auto z : f) {
    Vector gf(3);
    for (std::size_t i = 0; i < 3; ++i) gf(i) = g(f[i], z);
    const Vector residual = g.col(z) - hm * gf;
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Shift, NormalizationAndMeanShift) {
  const auto e = k3();
  const FieldSampler s(e);
  const Vector f = (Vector(3) << 0.3, -0.2, 0.5).finished();
  EXPECT_DOUBLE_EQ(shift_log_density(e, Vector::Zero(3), Vector::Ones(3)), 0.0);
  Stream rng(11);
  Accumulator norm;
  std::vector<Accumulator> mean(3);
  for (std::size_t i = 0; i < kSamples; ++i) {
    const Vector phi = s.sample_real(rng);
    const double w = std::exp(shift_log_density(e, f, phi));
    norm.add(w);
    for (std::size_t j = 0; j < 3; ++j) mean[j].add(w * phi(j));
  }
  EXPECT_TRUE(within_stderr(norm.estimate(), 1.0));
  for (std::size_t j = 0; j < 3; ++j) EXPECT_TRUE(within_stderr(mean[j].estimate(), f(j)));
}

TEST(HTransform, CovarianceScalesByH) {
  // h excessive, C'(x,y) = h_x h_y C(x,y), kappa' = h (M - C) h: then G' = G / (h h^T).
  const auto e = testing::random_form(12, 6);
  const Matrix g = green(e).matrix;
  const Vector h = g * Vector::Ones(6);  // excessive: (M - C) h = 1 >= 0
  const Matrix& c = e.conductance();
  Matrix c2(6, 6);
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) c2(x, y) = h(x) * h(y) * c(x, y);
  const Vector kappa2 = h.cwiseProduct(e.operator_matrix() * h);
  const EnergyForm e2(e.names(), c2, kappa2);
  const Matrix g2m = green(e2).matrix;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) EXPECT_NEAR(h(x) * g2m(x, y) * h(y), g(x, y), 1e-10);
}

}  // namespace
}  // namespace loopsoup
