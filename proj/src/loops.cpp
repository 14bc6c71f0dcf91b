#include "loopsoup/loops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "loopsoup/exact.hpp"
#include "loopsoup/kernels.hpp"

namespace loopsoup {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

template <class T>
std::vector<T> rotate_left(const std::vector<T>& v, std::size_t r) {
  std::vector<T> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[(i + r) % v.size()];
  return out;
}

}  // namespace

DiscreteLoop::DiscreteLoop(std::vector<std::size_t> word) {
  if (word.empty()) throw ModelError("a loop needs at least one vertex");
  cycle_ = rotate_left(word, canonical_offset(word));
}

std::size_t DiscreteLoop::canonical_offset(const std::vector<std::size_t>& word) {
  const std::size_t p = word.size();
  std::size_t best = 0;
  for (std::size_t r = 1; r < p; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const auto a = word[(r + i) % p], b = word[(best + i) % p];
      if (a != b) {
        if (a < b) best = r;
        break;
      }
    }
  }
  return best;
}

std::size_t DiscreteLoop::period() const {
  const std::size_t p = cycle_.size();
  for (std::size_t d = 1; d < p; ++d) {
    if (p % d != 0) continue;
    bool same = true;
    for (std::size_t i = 0; i < p && same; ++i) same = cycle_[i] == cycle_[(i + d) % p];
    if (same) return d;
  }
  return p;
}

DiscreteLoop DiscreteLoop::reversed() const {
  std::vector<std::size_t> w(cycle_.rbegin(), cycle_.rend());
  return DiscreteLoop(std::move(w));
}

LoopSample LoopSample::make(std::vector<std::size_t> word, std::vector<double> holding) {
  if (word.size() != holding.size()) throw ModelError("one holding time per visit required");
  const auto r = DiscreteLoop::canonical_offset(word);
  LoopSample s;
  s.holding = rotate_left(holding, r);
  s.loop = DiscreteLoop(std::move(word));
  return s;
}

void check_loop(const EnergyForm& e, const DiscreteLoop& l) {
  const auto& c = l.cycle();
  for (auto x : c)
    if (x >= e.size()) throw ModelError("loop visits an unknown vertex");
  if (c.size() < 2) return;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (e.conductance()(ix(c[i]), ix(c[(i + 1) % c.size()])) <= 0.0)
      throw ModelError("loop uses a pair of vertices that are not linked");
}

double discrete_loop_measure(const EnergyForm& e, const DiscreteLoop& l) {
  if (l.length() < 2) throw ModelError("loop measure of discrete loops needs length >= 2");
  check_loop(e, l);
  const Matrix p = transition_matrix(e);
  const auto& c = l.cycle();
  double prod = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i) prod *= p(ix(c[i]), ix(c[(i + 1) % c.size()]));
  return static_cast<double>(l.period()) / static_cast<double>(l.length()) * prod;
}

LengthDistribution length_distribution(const EnergyForm& e, double tail_eps) {
  if (!(tail_eps > 0.0)) throw ModelError("tail_eps must be positive");
  LengthDistribution out;
  out.mass = loop_mass_nontrivial(e);
  out.probability.assign(2, 0.0);
  if (out.mass <= 0.0) return out;

  const auto n = e.size();
  // Spectral radius of P via the symmetric conjugate M^-1/2 C M^-1/2.
  const Vector s = e.lambda().cwiseSqrt().cwiseInverse();
  const Matrix sym = s.asDiagonal() * e.conductance() * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double rho = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double target = tail_eps * out.mass;
  std::size_t k_max = 2;
  // Tr(P^k) <= n rho^k, so the tail beyond K is below n rho^{K+1} / ((K+1)(1-rho)).
  while (static_cast<double>(n) * std::pow(rho, static_cast<double>(k_max + 1)) /
             (static_cast<double>(k_max + 1) * (1.0 - rho)) >=
         target) {
    ++k_max;
    if (k_max > 100000) throw ModelError("loop length cutoff too large; spectral radius too close to 1");
  }
  out.k_max = k_max;
  const Matrix p = transition_matrix(e);
  Matrix pk = p;
  double kept = 0.0;
  out.probability.assign(k_max + 1, 0.0);
  for (std::size_t k = 2; k <= k_max; ++k) {
    pk = pk * p;
    const double w = std::max(0.0, pk.trace()) / static_cast<double>(k);
    out.probability[k] = w;
    kept += w;
  }
  out.discarded_tail = std::max(0.0, out.mass - kept);
  for (auto& v : out.probability) v /= kept;
  return out;
}

LoopSampler::LoopSampler(const EnergyForm& e, double tail_eps)
    : form_(e), transition_(transition_matrix(e)), lengths_(length_distribution(e, tail_eps)) {
  if (lengths_.mass <= 0.0) return;
  const auto n = e.size();
  const auto k_max = lengths_.k_max;
  if (static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(k_max) > 2e8)
    throw ModelError("transition powers for loop sampling exceed the memory budget");
  powers_.reserve(k_max + 1);
  powers_.push_back(Matrix::Identity(ix(n), ix(n)));
  for (std::size_t k = 1; k <= k_max; ++k) powers_.push_back(powers_.back() * transition_);
  length_cumulative_.resize(k_max + 1);
  std::partial_sum(lengths_.probability.begin(), lengths_.probability.end(), length_cumulative_.begin());
  base_cumulative_.resize(k_max + 1);
  for (std::size_t k = 2; k <= k_max; ++k) {
    auto& cum = base_cumulative_[k];
    cum.resize(n);
    double acc = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      acc += std::max(0.0, powers_[k](ix(x), ix(x)));
      cum[x] = acc;
    }
  }
}

LoopSample LoopSampler::sample_loop(Stream& rng) const {
  if (lengths_.mass <= 0.0) throw ModelError("no nontrivial loops: loop mass is zero");
  const auto n = form_.size();
  const std::size_t k = rng.categorical(length_cumulative_);
  std::vector<std::size_t> word(k);
  word[0] = rng.categorical(base_cumulative_[k]);
  std::vector<double> weights(n);
  for (std::size_t j = 1; j < k; ++j) {
    const auto& closing = powers_[k - j];
    double acc = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      acc += transition_(ix(word[j - 1]), ix(v)) * closing(ix(v), ix(word[0]));
      weights[v] = acc;
    }
    word[j] = rng.categorical(weights);
  }
  std::vector<double> holding(k);
  for (std::size_t j = 0; j < k; ++j) holding[j] = rng.exponential(form_.lambda()(ix(word[j])));
  return LoopSample::make(std::move(word), std::move(holding));
}

LoopEnsemble LoopSampler::sample_soup(double alpha, Stream& rng) const {
  if (!(alpha > 0.0)) throw ModelError("alpha must be positive");
  LoopEnsemble ens;
  ens.alpha = alpha;
  ens.discarded_tail = lengths_.discarded_tail;
  const auto count = rng.poisson(alpha * lengths_.mass);
  ens.loops.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) ens.loops.push_back(sample_loop(rng));
  const auto n = form_.size();
  ens.trivial_occupation.resize(ix(n));
  for (std::size_t x = 0; x < n; ++x)
    ens.trivial_occupation(ix(x)) = rng.gamma(alpha, form_.lambda()(ix(x)));
  return ens;
}

LoopSample sample_nontrivial_loop(const EnergyForm& e, Stream& rng) { return LoopSampler(e).sample_loop(rng); }

LoopEnsemble sample_soup(const EnergyForm& e, double alpha, Stream& rng) {
  return LoopSampler(e).sample_soup(alpha, rng);
}

Vector loop_occupation(const LoopSample& l, std::size_t n) {
  Vector v = Vector::Zero(ix(n));
  const auto& c = l.loop.cycle();
  for (std::size_t i = 0; i < c.size(); ++i) v(ix(c[i])) += l.holding[i];
  return v;
}

OccupationField occupation_field(const LoopEnsemble& ens) {
  OccupationField f;
  f.values = ens.trivial_occupation;
  const auto n = static_cast<std::size_t>(f.values.size());
  for (const auto& l : ens.loops) f.values += loop_occupation(l, n);
  return f;
}

RadonNikodym RadonNikodym::between(const EnergyForm& e, const EnergyForm& e_prime) {
  if (e.size() != e_prime.size()) throw ModelError("energy forms live on different vertex sets");
  RadonNikodym rn;
  const auto n = ix(e.size());
  rn.log_conductance_ratio = Matrix::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      const double c = e.conductance()(x, y), cp = e_prime.conductance()(x, y);
      if (c > 0.0)
        rn.log_conductance_ratio(x, y) = cp > 0.0 ? std::log(cp / c) : -std::numeric_limits<double>::infinity();
      else if (cp > 0.0)
        throw ModelError("e' has links that e lacks; not absolutely continuous");
    }
  rn.lambda_shift = e_prime.lambda() - e.lambda();
  return rn;
}

namespace {

struct Evaluator {
  const LoopSample& l;

  const std::vector<std::size_t>& c() const { return l.loop.cycle(); }

  double operator()(const EdgeCount& f) const {
    double count = 0.0;
    const auto p = c().size();
    if (p < 2) return 0.0;
    for (std::size_t i = 0; i < p; ++i)
      if (c()[i] == f.x && c()[(i + 1) % p] == f.y) count += 1.0;
    return count;
  }
  double operator()(const VisitCount& f) const {
    if (c().size() < 2) return 0.0;
    return static_cast<double>(std::count(c().begin(), c().end(), f.x));
  }
  double operator()(const OccupationAt& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < c().size(); ++i)
      if (c()[i] == f.x) acc += l.holding[i];
    return acc;
  }
  double operator()(const MultiOccupation& f) const {
    const auto k = f.points.size();
    if (k == 0) return 1.0;
    double total = 0.0;
    std::vector<double> dp(k + 1), next(k + 1);
    for (std::size_t shift = 0; shift < k; ++shift) {
      auto label = [&](std::size_t i) { return f.points[(i + shift) % k]; };
      std::fill(dp.begin(), dp.end(), 0.0);
      dp[0] = 1.0;
      for (std::size_t v = 0; v < c().size(); ++v) {
        next = dp;
        const double tau = l.holding[v];
        for (std::size_t m0 = 0; m0 < k; ++m0) {
          if (dp[m0] == 0.0) continue;
          // Assign labels m0 .. m0+r-1 to this visit: ordered times inside
          // one holding interval contribute tau^r / r!.
          double w = 1.0;
          for (std::size_t r = 1; m0 + r <= k && label(m0 + r - 1) == c()[v]; ++r) {
            w *= tau / static_cast<double>(r);
            next[m0 + r] += dp[m0] * w;
          }
        }
        dp.swap(next);
      }
      total += dp[k];
    }
    return total;
  }
  double operator()(const SelfIntersection& f) const {
    if (f.k < 0) throw ModelError("self-intersection order must be nonnegative");
    const auto k = static_cast<std::size_t>(f.k);
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (std::size_t i = 0; i < c().size(); ++i) {
      if (c()[i] != f.x) continue;
      for (std::size_t j = k; j >= 1; --j) e[j] += e[j - 1] * l.holding[i];
    }
    return e[k];
  }
  double operator()(const CurrentIntegral& f) const {
    const auto p = c().size();
    if (p < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) acc += f.omega(c()[i], c()[(i + 1) % p]);
    return acc;
  }
  double operator()(const RadonNikodym& f) const {
    const auto p = c().size();
    double log_w = 0.0;
    if (p >= 2)
      for (std::size_t i = 0; i < p; ++i)
        log_w += f.log_conductance_ratio(ix(c()[i]), ix(c()[(i + 1) % p]));
    for (std::size_t i = 0; i < p; ++i) log_w -= f.lambda_shift(ix(c()[i])) * l.holding[i];
    return std::exp(log_w);
  }
  double operator()(const EnergyVariation& f) const {
    return f.conductance * ((*this)(OccupationAt{f.x}) + (*this)(OccupationAt{f.y})) -
           (*this)(EdgeCount{f.x, f.y}) - (*this)(EdgeCount{f.y, f.x});
  }
};

}  // namespace

LoopFunctionalKind parse_loop_functional_kind(std::string_view name) {
  if (name == "edge-count") return LoopFunctionalKind::kEdgeCount;
  if (name == "visit-count") return LoopFunctionalKind::kVisitCount;
  if (name == "occupation") return LoopFunctionalKind::kOccupation;
  if (name == "multi-occupation") return LoopFunctionalKind::kMultiOccupation;
  if (name == "self-intersection") return LoopFunctionalKind::kSelfIntersection;
  if (name == "current-integral") return LoopFunctionalKind::kCurrentIntegral;
  if (name == "rn-weight") return LoopFunctionalKind::kRadonNikodym;
  if (name == "energy-variation") return LoopFunctionalKind::kEnergyVariation;
  throw ModelError("unknown loop functional '" + std::string(name) + "'");
}

double evaluate(const LoopSample& l, const LoopFunctional& f) { return std::visit(Evaluator{l}, f); }

double radon_nikodym_weight(const LoopEnsemble& ens, const RadonNikodym& rn) {
  double log_w = -rn.lambda_shift.dot(ens.trivial_occupation);
  for (const auto& l : ens.loops) log_w += std::log(evaluate(l, rn));
  return std::exp(log_w);
}

std::optional<LoopSample> loop_trace(const LoopSample& l, const VertexSet& f) {
  if (f.empty()) throw ModelError("trace needs a nonempty set");
  std::vector<int> position;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] >= position.size()) position.resize(f[i] + 1, -1);
    position[f[i]] = static_cast<int>(i);
  }
  std::vector<std::size_t> word;
  std::vector<double> holding;
  const auto& c = l.loop.cycle();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] >= position.size() || position[c[i]] < 0) continue;
    const auto v = static_cast<std::size_t>(position[c[i]]);
    if (!word.empty() && word.back() == v) {
      holding.back() += l.holding[i];
    } else {
      word.push_back(v);
      holding.push_back(l.holding[i]);
    }
  }
  if (word.empty()) return std::nullopt;
  while (word.size() > 1 && word.front() == word.back()) {
    holding.front() += holding.back();
    word.pop_back();
    holding.pop_back();
  }
  return LoopSample::make(std::move(word), std::move(holding));
}

}  // namespace loopsoup
