#pragma once

#include <cstddef>
#include <vector>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

/// Vertex sequence, possibly ending at the cemetery, with one holding time
/// per visit of X.
struct Path {
  std::vector<std::size_t> states;
  std::vector<double> holdings;
};

/// Run from x with kernel P until absorption at the cemetery. Per visit: the
/// holding time, then the jump.
Path sample_path_to_death(const EnergyForm& e, std::size_t x, Stream& rng);

/// Bridge from any x to a fixed y: the h-transform walk with h = G(., y),
/// stopped at y with probability 1 / (lambda_y G^{yy}) on each visit.
class BridgeSampler {
 public:
  BridgeSampler(const EnergyForm& e, std::size_t y);
  Path sample(std::size_t x, Stream& rng) const;
  std::size_t target() const { return target_; }

 private:
  EnergyForm form_;
  std::size_t target_;
  std::vector<std::vector<double>> cumulative_;  // last cell = stop, nonzero only at y
};

Path sample_bridge(const EnergyForm& e, std::size_t x, std::size_t y, Stream& rng);

/// Chronological loop erasure. A revisit closes the cycle started at the
/// earlier visit; the skeleton keeps the holding of the latest visit.
struct LoopErasure {
  Path skeleton;
  std::vector<LoopSample> loops;
};
LoopErasure loop_erase(const Path& p);

/// Mass of the loop-erased image of P^x at a self-avoiding eta = (x, ..., Delta):
/// prod C along eta times kappa at the last vertex times det G restricted to eta.
double be_mass_exact(const EnergyForm& e, std::size_t x, const std::vector<std::size_t>& eta);

/// All self-avoiding paths from x ending at the cemetery (test oracle scale).
std::vector<std::vector<std::size_t>> enumerate_self_avoiding_paths(const EnergyForm& e, std::size_t x);

/// Spanning tree of X rooted at the cemetery: parent[x] in X or delta().
struct SpanningTree {
  std::vector<std::size_t> parent;
  bool contains(Link l) const;  // either orientation
  auto operator<=>(const SpanningTree&) const = default;
};

struct WilsonResult {
  SpanningTree tree;
  std::vector<LoopSample> erased;
};

/// Wilson's algorithm rooted at the cemetery, launching walks in `ordering`.
WilsonResult wilson(const EnergyForm& e, const std::vector<std::size_t>& ordering, Stream& rng);

/// Z_e * product of link weights (C, or kappa toward the cemetery).
double tree_probability(const EnergyForm& e, const SpanningTree& t);

/// Every cemetery-rooted spanning tree; |X| <= 8.
std::vector<SpanningTree> enumerate_spanning_trees(const EnergyForm& e);

/// P(all links in the tree, either orientation) = prod C * det K|_links.
double transfer_current_inclusion(const EnergyForm& e, const std::vector<Link>& links);

}  // namespace loopsoup
