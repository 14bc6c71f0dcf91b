#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/linalg.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Cyclic vertex word stored as its lexicographically least rotation.
class DiscreteLoop {
 public:
  DiscreteLoop() = default;
  /// Canonicalizes `word`; throws ModelError if empty.
  explicit DiscreteLoop(std::vector<std::size_t> word);

  const std::vector<std::size_t>& cycle() const { return cycle_; }
  std::size_t length() const { return cycle_.size(); }
  /// Minimal period of the cyclic word (number of distinct rotations).
  std::size_t period() const;
  DiscreteLoop reversed() const;

  /// Offset r such that rotating `word` left by r gives the canonical form.
  static std::size_t canonical_offset(const std::vector<std::size_t>& word);

  bool operator==(const DiscreteLoop&) const = default;
  auto operator<=>(const DiscreteLoop&) const = default;

 private:
  std::vector<std::size_t> cycle_;
};

/// Discrete loop with the intrinsic holding time of each visit.
struct LoopSample {
  DiscreteLoop loop;
  std::vector<double> holding;

  /// Rotates word and holdings together into canonical position.
  static LoopSample make(std::vector<std::size_t> word, std::vector<double> holding);
};

struct LoopEnsemble {
  std::vector<LoopSample> loops;  // nontrivial loops only
  Vector trivial_occupation;      // aggregate time of one-point loops
  double alpha = 1.0;
  double discarded_tail = 0.0;    // loop mass beyond the length cutoff
};

struct OccupationField {
  Vector values;
};

/// Throws ModelError if consecutive vertices (cyclically) are not linked.
void check_loop(const EnergyForm& e, const DiscreteLoop& l);

/// mu of the loop class: (period / length) * prod P along the cycle.
double discrete_loop_measure(const EnergyForm& e, const DiscreteLoop& l);

/// Law of the length of a nontrivial loop: p_k = Tr(P^k) / (k m), k >= 2.
struct LengthDistribution {
  std::vector<double> probability;  // indexed by k; entries 0 and 1 are zero
  std::size_t k_max = 1;
  double mass = 0.0;                // m = -log det(I - P)
  double discarded_tail = 0.0;      // m - sum_{k <= k_max} Tr(P^k)/k
};
LengthDistribution length_distribution(const EnergyForm& e, double tail_eps = 1e-12);

/// Samples nontrivial loops and Poisson soups for one energy form.
///
/// Precomputes P^j for j <= k_max. Draw order per loop: length, base point,
/// k-1 bridge steps, then k holding times. Per soup: the Poisson count, the
/// loops, then one Gamma draw per vertex for the trivial occupation.
class LoopSampler {
 public:
  explicit LoopSampler(const EnergyForm& e, double tail_eps = 1e-12);

  const EnergyForm& form() const { return form_; }
  const LengthDistribution& lengths() const { return lengths_; }
  double mass() const { return lengths_.mass; }

  /// Draw from mu(. | p >= 2); requires mass() > 0.
  LoopSample sample_loop(Stream& rng) const;
  LoopEnsemble sample_soup(double alpha, Stream& rng) const;

 private:
  EnergyForm form_;
  Matrix transition_;
  LengthDistribution lengths_;
  std::vector<Matrix> powers_;                // P^0 .. P^k_max
  std::vector<double> length_cumulative_;
  std::vector<std::vector<double>> base_cumulative_;
};

LoopSample sample_nontrivial_loop(const EnergyForm& e, Stream& rng);
LoopEnsemble sample_soup(const EnergyForm& e, double alpha, Stream& rng);

/// Per-vertex sum of holdings plus the trivial occupation.
OccupationField occupation_field(const LoopEnsemble& ens);
Vector loop_occupation(const LoopSample& l, std::size_t n);

// Loop functionals.
struct EdgeCount {
  std::size_t x, y;
};
struct VisitCount {
  std::size_t x;
};
struct OccupationAt {
  std::size_t x;
};
/// Time-ordered occupation of the points in cyclic order (any rotation).
struct MultiOccupation {
  std::vector<std::size_t> points;
};
/// Sum over k distinct visits to x of the product of their holdings.
struct SelfIntersection {
  std::size_t x;
  int k;
};
struct CurrentIntegral {
  Current omega;
};
/// d mu_{e'} / d mu_e on nontrivial loops.
struct RadonNikodym {
  Matrix log_conductance_ratio;
  Vector lambda_shift;
  static RadonNikodym between(const EnergyForm& e, const EnergyForm& e_prime);
};
/// T_xy = C_xy (l^x + l^y) - N_xy - N_yx.
struct EnergyVariation {
  std::size_t x, y;
  double conductance;
};

using LoopFunctional = std::variant<EdgeCount, VisitCount, OccupationAt, MultiOccupation,
                                    SelfIntersection, CurrentIntegral, RadonNikodym, EnergyVariation>;

enum class LoopFunctionalKind {
  kEdgeCount,
  kVisitCount,
  kOccupation,
  kMultiOccupation,
  kSelfIntersection,
  kCurrentIntegral,
  kRadonNikodym,
  kEnergyVariation
};
/// Throws ModelError for unknown names.
LoopFunctionalKind parse_loop_functional_kind(std::string_view name);

double evaluate(const LoopSample& l, const LoopFunctional& f);

/// Ensemble-level Radon-Nikodym weight including trivial loops.
double radon_nikodym_weight(const LoopEnsemble& ens, const RadonNikodym& rn);

/// Visits in F only, with consecutive repeats merged (their holdings summed).
/// Vertex labels are positions within the sorted F. Empty if l avoids F.
std::optional<LoopSample> loop_trace(const LoopSample& l, const VertexSet& f);

}  // namespace loopsoup
