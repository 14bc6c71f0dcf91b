#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <map>

#include "loopsoup/exact.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/verify.hpp"
#include "test_support.hpp"

namespace loopsoup {
namespace {

using testing::g2;
using testing::k3;
using testing::same_mean;
using testing::within_stderr;

constexpr std::size_t kSamples = 100000;

TEST(DiscreteLoop, CanonicalRotation) {
  const DiscreteLoop a({2, 0, 1, 0});
  EXPECT_EQ(a.cycle(), (std::vector<std::size_t>{0, 1, 0, 2}));
  EXPECT_EQ(DiscreteLoop({1, 0, 2, 0}), a);
  EXPECT_EQ(DiscreteLoop({0, 1, 0, 1}).period(), 2u);
  EXPECT_EQ(DiscreteLoop({0, 1, 2}).period(), 3u);
  EXPECT_EQ(DiscreteLoop({0, 1, 2}).reversed().cycle(), (std::vector<std::size_t>{0, 2, 1}));
  EXPECT_THROW(DiscreteLoop(std::vector<std::size_t>{}), ModelError);
}

TEST(LoopSample, MakeRotatesHoldingsWithWord) {
  const auto l = LoopSample::make({2, 0, 1}, {0.3, 0.1, 0.2});
  EXPECT_EQ(l.loop.cycle(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(l.holding, (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(LoopMeasure, FixtureValues) {
  EXPECT_NEAR(discrete_loop_measure(g2(), DiscreteLoop({0, 1})), 0.25, 1e-15);
  EXPECT_NEAR(discrete_loop_measure(g2(), DiscreteLoop({0, 1, 0, 1})), 1.0 / 32.0, 1e-15);
  EXPECT_NEAR(discrete_loop_measure(k3(), DiscreteLoop({0, 1, 2})), 1.0 / 27.0, 1e-15);
  EXPECT_THROW(discrete_loop_measure(testing::sq1(), DiscreteLoop({0, 2})), ModelError);
}

// Enumerates all based words of length k, groups them into classes and checks
// that class masses add up to Tr(P^k) / k, and that reversal preserves mass.
TEST(LoopMeasure, ClassesSumToTraceAndReversalInvariant) {
  const auto e = testing::random_form(3, 4);
  const Matrix p = transition_matrix(e);
  Matrix pk = p;
  for (std::size_t k = 2; k <= 6; ++k) {
    pk = pk * p;
    std::map<DiscreteLoop, double> classes;
    std::vector<std::size_t> w(k, 0);
    for (;;) {
      double prod = 1.0;
      for (std::size_t i = 0; i < k; ++i) prod *= p(w[i], w[(i + 1) % k]);
      if (prod > 0.0) classes.emplace(DiscreteLoop(w), 0.0);
      std::size_t i = 0;
      while (i < k && ++w[i] == 4) w[i++] = 0;
      if (i == k) break;
    }
    double total = 0.0;
    for (const auto& [l, _] : classes) {
      const double m = discrete_loop_measure(e, l);
      total += m;
      EXPECT_NEAR(m, discrete_loop_measure(e, l.reversed()), 1e-15);
    }
    EXPECT_NEAR(total, pk.trace() / static_cast<double>(k), 1e-14);
  }
}

TEST(LengthDistribution, FixtureValues) {
  const auto d = length_distribution(g2());
  EXPECT_NEAR(d.probability[2], 0.25 / std::log(4.0 / 3.0), 1e-10);
  EXPECT_NEAR(d.probability[3], 0.0, 1e-15);
  EXPECT_NEAR(d.probability[4], 2.0 * std::pow(0.5, 4) / 4.0 / std::log(4.0 / 3.0), 1e-10);
  double total = 0.0;
  for (double p : d.probability) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  const auto k = length_distribution(k3());
  const double m = std::log(27.0 / 16.0);
  for (int j = 2; j <= 6; ++j)
    EXPECT_NEAR(k.probability[j], (std::pow(2.0 / 3.0, j) + 2.0 * std::pow(-1.0 / 3.0, j)) / j / m, 1e-10);
  EXPECT_LT(k.discarded_tail, 1e-12 * m);
}

TEST(SampleLoop, G2LoopsAlternateWithCorrectLengthLaw) {
  const LoopSampler s(g2());
  Stream rng(1);
  Accumulator len2, hold;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto l = s.sample_loop(rng);
    const auto& c = l.loop.cycle();
    ASSERT_EQ(c.size() % 2, 0u);
    for (std::size_t j = 0; j < c.size(); ++j) ASSERT_NE(c[j], c[(j + 1) % c.size()]);
    len2.add(c.size() == 2 ? 1.0 : 0.0);
    for (double h : l.holding) hold.add(h);
  }
  EXPECT_TRUE(within_stderr(len2.estimate(), 0.25 / std::log(4.0 / 3.0)));
  EXPECT_TRUE(within_stderr(hold.estimate(), 0.5));
}

TEST(SampleLoop, K3ClassLawMatchesLoopMeasure) {
  const auto e = k3();
  const LoopSampler s(e);
  Stream rng(2);
  std::map<DiscreteLoop, std::uint64_t> counts;
  Accumulator forward;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto l = s.sample_loop(rng);
    if (l.loop.length() <= 4) ++counts[l.loop];
    if (l.loop.length() == 3) forward.add(l.loop == DiscreteLoop({0, 1, 2}) ? 1.0 : 0.0);
  }
  EXPECT_TRUE(within_stderr(forward.estimate(), 0.5));
  // Classes of length <= 4 plus one pooled cell for longer loops.
  std::vector<std::uint64_t> obs;
  std::vector<double> exp;
  double covered = 0.0;
  std::uint64_t seen = 0;
  for (const auto& [l, c] : counts) {
    const double p = discrete_loop_measure(e, l) / s.mass();
    obs.push_back(c);
    exp.push_back(p);
    covered += p;
    seen += c;
  }
  obs.push_back(kSamples - seen);
  exp.push_back(1.0 - covered);
  EXPECT_GT(chi_squared(obs, exp), 1e-3);
}

TEST(SampleSoup, MeansMatchGreenFunction) {
  const auto e = k3();
  const LoopSampler s(e);
  const Matrix g = green(e).matrix;
  for (double alpha : {0.5, 1.0, 2.0}) {
    Stream rng = Stream::derive(10, static_cast<std::uint64_t>(alpha * 10));
    Accumulator count, trivial, occ, nab, na;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const auto ens = s.sample_soup(alpha, rng);
      count.add(static_cast<double>(ens.loops.size()));
      trivial.add(ens.trivial_occupation(0));
      occ.add(occupation_field(ens).values(0));
      double ab = 0.0, a = 0.0;
      for (const auto& l : ens.loops) {
        ab += evaluate(l, EdgeCount{0, 1});
        a += evaluate(l, VisitCount{0});
      }
      nab.add(ab);
      na.add(a);
    }
    EXPECT_TRUE(within_stderr(count.estimate(), alpha * std::log(27.0 / 16.0)));
    EXPECT_TRUE(within_stderr(trivial.estimate(), alpha / 3.0));
    EXPECT_TRUE(within_stderr(occ.estimate(), alpha * g(0, 0)));
    EXPECT_TRUE(within_stderr(nab.estimate(), alpha * g(0, 1)));
    EXPECT_TRUE(within_stderr(na.estimate(), alpha * (3.0 * g(0, 0) - 1.0)));
  }
}

TEST(SampleSoup, G2CountAndTrivialMeans) {
  const LoopSampler s(g2());
  Stream rng(12);
  Accumulator count, trivial;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto ens = s.sample_soup(1.0, rng);
    count.add(static_cast<double>(ens.loops.size()));
    trivial.add(ens.trivial_occupation(0));
  }
  EXPECT_TRUE(within_stderr(count.estimate(), std::log(4.0 / 3.0)));
  EXPECT_TRUE(within_stderr(trivial.estimate(), 0.5));
}

TEST(SampleSoup, AvoidanceMatchesExact) {
  const auto e = testing::sq1();
  const LoopSampler s(e);
  Stream rng(13);
  Accumulator avoid;
  for (std::size_t i = 0; i < kSamples; ++i) {
    bool hit = false;
    for (const auto& l : s.sample_soup(1.3, rng).loops)
      for (auto v : l.loop.cycle()) hit = hit || v == 0 || v == 2;
    avoid.add(hit ? 0.0 : 1.0);
  }
  EXPECT_TRUE(within_stderr(avoid.estimate(), avoidance_probability(e, {0, 2}, 1.3)));
}

TEST(SampleSoup, RestrictionProperty) {
  const auto e = testing::sq1();
  const VertexSet d{0, 1, 2};
  const auto ed = e.restricted(d);
  const LoopSampler full(e), inner(ed);
  Stream r1(14), r2(15);
  Accumulator n_full, n_inner, len_full, len_inner;
  for (std::size_t i = 0; i < kSamples; ++i) {
    double visits = 0.0, len2 = 0.0;
    for (const auto& l : full.sample_soup(1.0, r1).loops) {
      const auto& c = l.loop.cycle();
      if (std::find(c.begin(), c.end(), 3) != c.end()) continue;
      visits += evaluate(l, VisitCount{1});
      len2 += c.size() == 2 ? 1.0 : 0.0;
    }
    n_full.add(visits);
    len_full.add(len2);
    visits = len2 = 0.0;
    for (const auto& l : inner.sample_soup(1.0, r2).loops) {
      visits += evaluate(l, VisitCount{1});
      len2 += l.loop.length() == 2 ? 1.0 : 0.0;
    }
    n_inner.add(visits);
    len_inner.add(len2);
  }
  EXPECT_TRUE(same_mean(n_full.estimate(), n_inner.estimate()));
  EXPECT_TRUE(same_mean(len_full.estimate(), len_inner.estimate()));
}

TEST(SampleSoup, HoldingMomentsMatchVisitCounts) {
  // Sum over loops of (l^x)^k against (N_x + k - 1)...N_x / lambda^k, k = 2, 3.
  const auto e = k3();
  const LoopSampler s(e);
  Stream rng(16);
  Accumulator d2, d3, self2;
  const double lam = 3.0;
  for (std::size_t i = 0; i < kSamples; ++i) {
    double a2 = 0.0, a3 = 0.0, b = 0.0;
    for (const auto& l : s.sample_soup(1.0, rng).loops) {
      const double t = evaluate(l, OccupationAt{0});
      const double n = evaluate(l, VisitCount{0});
      a2 += t * t - n * (n + 1) / (lam * lam);
      a3 += t * t * t - n * (n + 1) * (n + 2) / (lam * lam * lam);
      b += evaluate(l, SelfIntersection{0, 2}) - n * (n - 1) / 2.0 / (lam * lam);
    }
    d2.add(a2);
    d3.add(a3);
    self2.add(b);
  }
  EXPECT_TRUE(within_stderr(d2.estimate(), 0.0));
  EXPECT_TRUE(within_stderr(d3.estimate(), 0.0));
  EXPECT_TRUE(within_stderr(self2.estimate(), 0.0));
}

TEST(SampleSoup, MultiOccupationMatchesGreenProducts) {
  const auto e = k3();
  const Matrix g = green(e).matrix;
  const LoopSampler s(e);
  Stream rng(17);
  Accumulator two, three;
  for (std::size_t i = 0; i < kSamples; ++i) {
    double a = 0.0, b = 0.0;
    for (const auto& l : s.sample_soup(1.0, rng).loops) {
      a += evaluate(l, MultiOccupation{{0, 1}});
      b += evaluate(l, MultiOccupation{{0, 1, 2}});
    }
    two.add(a);
    three.add(b);
  }
  EXPECT_TRUE(within_stderr(two.estimate(), g(0, 1) * g(1, 0)));
  EXPECT_TRUE(within_stderr(three.estimate(), g(0, 1) * g(1, 2) * g(2, 0)));
}

TEST(SampleSoup, G2TwoPointMultiOccupation) {
  const LoopSampler s(g2());
  Stream rng(18);
  Accumulator acc;
  for (std::size_t i = 0; i < kSamples; ++i) {
    const auto l = s.sample_loop(rng);
    acc.add(s.mass() * evaluate(l, MultiOccupation{{0, 1}}));
  }
  EXPECT_TRUE(within_stderr(acc.estimate(), 1.0 / 9.0));
}

TEST(SampleSoup, ReproducibleGivenSeed) {
  const LoopSampler s(testing::sq1());
  Stream a(99), b(99);
  for (int i = 0; i < 200; ++i) {
    const auto x = s.sample_soup(1.5, a), y = s.sample_soup(1.5, b);
    ASSERT_EQ(x.loops.size(), y.loops.size());
    for (std::size_t j = 0; j < x.loops.size(); ++j) {
      EXPECT_EQ(x.loops[j].loop, y.loops[j].loop);
      EXPECT_EQ(x.loops[j].holding, y.loops[j].holding);
    }
    EXPECT_EQ(x.trivial_occupation, y.trivial_occupation);
  }
}

TEST(Occupation, Definition) {
  LoopEnsemble ens;
  ens.trivial_occupation = Vector::Zero(2);
  EXPECT_EQ(occupation_field(ens).values, Vector::Zero(2));
  ens.loops.push_back(LoopSample::make({0, 1}, {0.4, 0.9}));
  const Vector v = occupation_field(ens).values;
  EXPECT_DOUBLE_EQ(v(0), 0.4);
  EXPECT_DOUBLE_EQ(v(1), 0.9);
}

TEST(Functionals, BasicValues) {
  const auto l = LoopSample::make({0, 1}, {0.2, 0.3});
  EXPECT_DOUBLE_EQ(evaluate(l, EdgeCount{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(evaluate(l, VisitCount{0}), 1.0);
  Current w(3);
  w.set(0, 1, 0.4);
  w.set(1, 2, 0.4);
  w.set(2, 0, 0.4);
  EXPECT_NEAR(evaluate(LoopSample::make({0, 1, 2}, {1, 1, 1}), CurrentIntegral{w}), 1.2, 1e-15);
  EXPECT_THROW(parse_loop_functional_kind("nope"), ModelError);
  EXPECT_EQ(parse_loop_functional_kind("rn-weight"), LoopFunctionalKind::kRadonNikodym);
}

TEST(Trace, Examples) {
  const auto a = loop_trace(LoopSample::make({0, 1}, {0.2, 0.3}), {0});
  ASSERT_TRUE(a);
  EXPECT_EQ(a->loop.cycle(), (std::vector<std::size_t>{0}));
  EXPECT_DOUBLE_EQ(a->holding[0], 0.2);
  const auto b = loop_trace(LoopSample::make({0, 2, 1, 2}, {0.1, 0.2, 0.3, 0.4}), {0, 1});
  ASSERT_TRUE(b);
  EXPECT_EQ(b->loop.cycle(), (std::vector<std::size_t>{0, 1}));
  EXPECT_FALSE(loop_trace(LoopSample::make({2, 3}, {1, 1}), {0, 1}));
  const auto c = loop_trace(LoopSample::make({0, 2, 0, 1}, {0.1, 0.2, 0.3, 0.4}), {0, 1});
  ASSERT_TRUE(c);
  EXPECT_EQ(c->loop.cycle(), (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(c->holding[0], 0.4, 1e-15);
}

}  // namespace
}  // namespace loopsoup
