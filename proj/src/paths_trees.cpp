#include "loopsoup/paths_trees.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "loopsoup/exact.hpp"

namespace loopsoup {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Cumulative jump weights over X plus the cemetery.
std::vector<std::vector<double>> jump_table(const EnergyForm& e) {
  const auto n = e.size();
  std::vector<std::vector<double>> table(n, std::vector<double>(n + 1));
  for (std::size_t u = 0; u < n; ++u) {
    double acc = 0.0;
    for (std::size_t v = 0; v <= n; ++v) {
      acc += e.conductance(u, v);
      table[u][v] = acc;
    }
  }
  return table;
}

void check_vertex(const EnergyForm& e, std::size_t x) {
  if (x >= e.size()) throw ModelError("vertex index out of range");
}

}  // namespace

Path sample_path_to_death(const EnergyForm& e, std::size_t x, Stream& rng) {
  check_vertex(e, x);
  const auto table = jump_table(e);
  Path p;
  std::size_t u = x;
  while (u != e.delta()) {
    p.states.push_back(u);
    p.holdings.push_back(rng.exponential(e.lambda()(ix(u))));
    u = rng.categorical(table[u]);
  }
  p.states.push_back(e.delta());
  return p;
}

BridgeSampler::BridgeSampler(const EnergyForm& e, std::size_t y) : form_(e), target_(y) {
  check_vertex(e, y);
  const auto n = e.size();
  const Matrix g = green(e).matrix;
  const Matrix p = transition_matrix(e);
  cumulative_.assign(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t u = 0; u < n; ++u) {
    double acc = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      acc += p(ix(u), ix(v)) * g(ix(v), ix(y));
      cumulative_[u][v] = acc;
    }
    if (u == y) acc += 1.0 / e.lambda()(ix(y));
    cumulative_[u][n] = acc;
  }
}

Path BridgeSampler::sample(std::size_t x, Stream& rng) const {
  check_vertex(form_, x);
  const auto n = form_.size();
  if (!(cumulative_[x][n] > 0.0)) throw ModelError("bridge target is unreachable");
  Path p;
  std::size_t u = x;
  for (;;) {
    p.states.push_back(u);
    p.holdings.push_back(rng.exponential(form_.lambda()(ix(u))));
    const auto v = rng.categorical(cumulative_[u]);
    if (v == n) break;
    u = v;
  }
  return p;
}

Path sample_bridge(const EnergyForm& e, std::size_t x, std::size_t y, Stream& rng) {
  return BridgeSampler(e, y).sample(x, rng);
}

LoopErasure loop_erase(const Path& p) {
  LoopErasure out;
  std::vector<std::size_t> stack_state;
  std::vector<double> stack_hold;
  std::vector<std::ptrdiff_t> where;  // position of a vertex on the stack, or -1
  auto locate = [&](std::size_t v) -> std::ptrdiff_t { return v < where.size() ? where[v] : -1; };
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    const auto v = p.states[i];
    const bool has_hold = i < p.holdings.size();
    const double h = has_hold ? p.holdings[i] : 0.0;
    const auto j = locate(v);
    if (j >= 0) {
      std::vector<std::size_t> word(stack_state.begin() + j, stack_state.end());
      std::vector<double> hold(stack_hold.begin() + j, stack_hold.end());
      for (auto w : word) where[w] = -1;
      stack_state.resize(static_cast<std::size_t>(j));
      stack_hold.resize(static_cast<std::size_t>(j));
      out.loops.push_back(LoopSample::make(std::move(word), std::move(hold)));
    }
    if (v >= where.size()) where.resize(v + 1, -1);
    where[v] = static_cast<std::ptrdiff_t>(stack_state.size());
    stack_state.push_back(v);
    stack_hold.push_back(h);
  }
  // A terminal cemetery visit carries no holding.
  if (p.holdings.size() < p.states.size() && !stack_hold.empty()) stack_hold.pop_back();
  out.skeleton.states = std::move(stack_state);
  out.skeleton.holdings = std::move(stack_hold);
  return out;
}

double be_mass_exact(const EnergyForm& e, std::size_t x, const std::vector<std::size_t>& eta) {
  if (eta.size() < 2 || eta.front() != x || eta.back() != e.delta())
    throw ModelError("eta must run from x to the cemetery");
  VertexSet points(eta.begin(), eta.end() - 1);
  VertexSet sorted = normalize_subset(e.size(), points);
  if (sorted.size() != points.size()) throw ModelError("eta is not self-avoiding");
  double weight = 1.0;
  for (std::size_t i = 0; i + 1 < eta.size(); ++i) weight *= e.conductance(eta[i], eta[i + 1]);
  if (weight == 0.0) return 0.0;
  const Matrix g = green(e).matrix;
  return weight * std::exp(log_det_spd(principal(g, points)));
}

std::vector<std::vector<std::size_t>> enumerate_self_avoiding_paths(const EnergyForm& e, std::size_t x) {
  check_vertex(e, x);
  if (e.size() > 10) throw ModelError("self-avoiding path enumeration limited to |X| <= 10");
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> path{x};
  std::vector<char> used(e.size(), 0);
  used[x] = 1;
  std::function<void()> extend = [&]() {
    const auto u = path.back();
    if (e.killing()(ix(u)) > 0.0) {
      path.push_back(e.delta());
      out.push_back(path);
      path.pop_back();
    }
    for (std::size_t v = 0; v < e.size(); ++v) {
      if (used[v] || e.conductance()(ix(u), ix(v)) <= 0.0) continue;
      used[v] = 1;
      path.push_back(v);
      extend();
      path.pop_back();
      used[v] = 0;
    }
  };
  extend();
  return out;
}

bool SpanningTree::contains(Link l) const {
  return (l.from < parent.size() && parent[l.from] == l.to) || (l.to < parent.size() && parent[l.to] == l.from);
}

WilsonResult wilson(const EnergyForm& e, const std::vector<std::size_t>& ordering, Stream& rng) {
  const auto n = e.size();
  {
    auto sorted = ordering;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i)
      if (sorted.size() != n || sorted[i] != i) throw ModelError("ordering must be a permutation of X");
  }
  const auto table = jump_table(e);
  WilsonResult out;
  out.tree.parent.assign(n, e.delta());
  std::vector<char> in_tree(n + 1, 0);
  in_tree[n] = 1;
  std::vector<std::ptrdiff_t> where(n, -1);
  std::vector<std::size_t> stack_state;
  std::vector<double> stack_hold;
  for (auto start : ordering) {
    if (in_tree[start]) continue;
    stack_state.clear();
    stack_hold.clear();
    std::size_t u = start;
    while (!in_tree[u]) {
      if (where[u] >= 0) {
        const auto j = where[u];
        std::vector<std::size_t> word(stack_state.begin() + j, stack_state.end());
        std::vector<double> hold(stack_hold.begin() + j, stack_hold.end());
        for (auto w : word) where[w] = -1;
        stack_state.resize(static_cast<std::size_t>(j));
        stack_hold.resize(static_cast<std::size_t>(j));
        out.erased.push_back(LoopSample::make(std::move(word), std::move(hold)));
      }
      where[u] = static_cast<std::ptrdiff_t>(stack_state.size());
      stack_state.push_back(u);
      stack_hold.push_back(rng.exponential(e.lambda()(ix(u))));
      u = rng.categorical(table[u]);
    }
    for (std::size_t i = 0; i < stack_state.size(); ++i) {
      const auto v = stack_state[i];
      out.tree.parent[v] = i + 1 < stack_state.size() ? stack_state[i + 1] : u;
      in_tree[v] = 1;
      where[v] = -1;
    }
  }
  return out;
}

double tree_probability(const EnergyForm& e, const SpanningTree& t) {
  double w = zeta(e);
  for (std::size_t x = 0; x < t.parent.size(); ++x) w *= e.conductance(x, t.parent[x]);
  return w;
}

std::vector<SpanningTree> enumerate_spanning_trees(const EnergyForm& e) {
  const auto n = e.size();
  if (n > 8) throw ModelError("spanning tree enumeration limited to |X| <= 8");
  std::vector<std::vector<std::size_t>> options(n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y <= n; ++y)
      if (y != x && e.conductance(x, y) > 0.0) options[x].push_back(y);
  std::vector<SpanningTree> out;
  SpanningTree t;
  t.parent.assign(n, e.delta());
  std::vector<std::size_t> choice(n, 0);
  auto acyclic = [&]() {
    // 0 unknown, 1 on current chain, 2 reaches the cemetery.
    std::vector<char> state(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
      std::vector<std::size_t> chain;
      std::size_t v = s;
      while (v != n && state[v] == 0) {
        state[v] = 1;
        chain.push_back(v);
        v = t.parent[v];
      }
      if (v != n && state[v] == 1) return false;
      for (auto c : chain) state[c] = 2;
    }
    return true;
  };
  std::function<void(std::size_t)> assign = [&](std::size_t x) {
    if (x == n) {
      if (acyclic()) out.push_back(t);
      return;
    }
    for (auto y : options[x]) {
      t.parent[x] = y;
      assign(x + 1);
    }
  };
  assign(0);
  return out;
}

double transfer_current_inclusion(const EnergyForm& e, const std::vector<Link>& links) {
  for (std::size_t i = 0; i < links.size(); ++i)
    for (std::size_t j = i + 1; j < links.size(); ++j)
      if (links[i] == links[j] || links[i] == links[j].reversed())
        throw ModelError("repeated link in transfer-current inclusion");
  double weight = 1.0;
  for (const auto& l : links) weight *= e.conductance(l.from, l.to);
  if (links.empty()) return 1.0;
  const TransferMatrix k = transfer_matrix(e, links);
  return weight * log_det(k.matrix).value();
}

}  // namespace loopsoup
