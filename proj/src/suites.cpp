#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>

#include "loopsoup/exact.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/paths_trees.hpp"
#include "loopsoup/verify.hpp"

namespace loopsoup {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vector unit(std::size_t n, std::size_t x, double value) {
  Vector v = Vector::Zero(ix(n));
  v(ix(x)) = value;
  return v;
}

// Symmetric link weights over X and the cemetery that separate trees.
Matrix tree_weights(std::size_t n) {
  Matrix g(ix(n + 1), ix(n + 1));
  for (std::size_t x = 0; x <= n; ++x)
    for (std::size_t y = 0; y <= n; ++y) g(ix(x), ix(y)) = 0.2 + 0.15 * static_cast<double>((x + 2 * y + 2 * x + y) % 5);
  return g;
}

bool visits(const LoopSample& l, std::size_t x) {
  const auto& c = l.loop.cycle();
  return std::find(c.begin(), c.end(), x) != c.end();
}

double loop_integral(const LoopSample& l, const Current& omega) {
  const auto& c = l.loop.cycle();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += omega(c[i], c[(i + 1) % c.size()]);
  return s;
}

// Total traversals of an unoriented link by a set of loops.
double traversals(const std::vector<LoopSample>& loops, std::size_t x, std::size_t y) {
  double n = 0.0;
  for (const auto& l : loops) n += evaluate(l, EdgeCount{x, y}) + evaluate(l, EdgeCount{y, x});
  return n;
}

class Runner {
 public:
  Runner(const EnergyForm& e, const SuiteOptions& o)
      : e_(e), o_(o), n_(e.size()), x0_(0), x1_(e.size() > 1 ? 1 : 0) {}

  IdentityReport finish(std::string_view suite) {
    std::sort(rows_.begin(), rows_.end(), [](const IdentityRow& a, const IdentityRow& b) { return a.name < b.name; });
    for (std::size_t i = 1; i < rows_.size(); ++i)
      if (rows_[i].name == rows_[i - 1].name) throw std::logic_error("duplicate row name " + rows_[i].name);
    IdentityReport r;
    r.suite = std::string(suite);
    r.seed = o_.seed;
    r.samples = o_.samples;
    r.tolerance = o_.tol;
    r.graph_digest = digest(e_);
    r.rows = std::move(rows_);
    return r;
  }

  void exact_only();
  void finite_difference();
  void soup();
  void dynkin();
  void wilson();
  void currents();
  void trace();
  void rn();

 private:
  // Runs body with the group's own stream and stamps seed and runtime on its rows.
  template <class Body>
  void group(const std::string& name, Body&& body) {
    Stream rng = Stream::derive(o_.seed, name);
    const auto seed = rng.seed();
    const auto start = std::chrono::steady_clock::now();
    std::vector<IdentityRow> out;
    body(rng, out);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    for (auto& r : out) {
      r.seed = seed;
      r.runtime_seconds = dt.count();
      rows_.push_back(std::move(r));
    }
  }

  void exact(std::vector<IdentityRow>& out, std::string name, double exact, double value) {
    out.push_back(exact_row(std::move(name), exact, value, o_.tol));
  }
  void mc(std::vector<IdentityRow>& out, std::string name, double exact, const Accumulator& acc) {
    out.push_back(mc_row(std::move(name), exact, acc.estimate(), o_.z_max));
  }

  std::vector<Vector> chis() const {
    Vector ramp(ix(n_));
    for (std::size_t i = 0; i < n_; ++i) ramp(ix(i)) = 0.2 + 0.4 * static_cast<double>(i) / static_cast<double>(n_);
    return {unit(n_, x0_, 0.7), Vector::Constant(ix(n_), 0.3), ramp};
  }

  VertexSet half() const {
    VertexSet f;
    for (std::size_t i = 0; i < (n_ + 1) / 2; ++i) f.push_back(i);
    return f;
  }

  const EnergyForm& e_;
  const SuiteOptions& o_;
  std::size_t n_;
  std::size_t x0_, x1_;
  std::vector<IdentityRow> rows_;
};

void Runner::exact_only() {
  group("exact", [&](Stream&, std::vector<IdentityRow>& out) {
    const Matrix g = green(e_).matrix;
    const Matrix a = e_.operator_matrix();
    exact(out, "green.kappa_to_one", 0.0, (g * e_.killing() - Vector::Ones(ix(n_))).cwiseAbs().maxCoeff());
    exact(out, "green.inverse", 0.0, max_abs(g * a - Matrix::Identity(ix(n_), ix(n_))));

    const auto cs = chis();
    for (std::size_t k = 0; k < 2; ++k) {
      const auto r = occupation_laplace_routes(e_, cs[k], 1.0);
      const auto tag = "laplace.routes.chi" + std::to_string(k + 1);
      exact(out, tag + ".resolvent", r.via_green, r.via_resolvent);
      exact(out, tag + ".ratio", r.via_green, r.via_ratio);
    }

    exact(out, "loops.mass", log_zeta(e_) + e_.lambda().array().log().sum(), loop_mass_nontrivial(e_));

    const Matrix k = transfer_matrix(e_).matrix;
    const auto links = default_links(e_);
    if (!links.empty()) {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
      exact(out, "transfer.psd", 0.0, std::min(0.0, eig.eigenvalues().minCoeff()));
      double gram = 0.0;
      for (std::size_t i = 0; i < links.size(); ++i)
        for (std::size_t j = 0; j < links.size(); ++j)
          gram = std::max(gram, std::abs(k(ix(i), ix(j)) - transfer_entry_resurrected(e_, links[i], links[j])));
      exact(out, "transfer.resurrected", 0.0, gram);
      auto flipped = links;
      flipped[0] = flipped[0].reversed();
      Matrix s = Matrix::Identity(k.rows(), k.cols());
      s(0, 0) = -1.0;
      exact(out, "transfer.orientation", 0.0, max_abs(transfer_matrix(e_, flipped).matrix - s * k * s));
    }

    if (n_ >= 2) {
      const VertexSet f = half();
      const VertexSet d = complement(n_, f);
      exact(out, "killed.det_ratio", log_det_spd(green_killed(e_, d).matrix),
            log_det_spd(g) - log_det_spd(principal(g, f)));
      const auto z = zeta_factorization_check(e_, f);
      exact(out, "zeta.factorization", std::log(z.zeta), std::log(z.zeta_killed) + std::log(z.zeta_traced));
      exact(out, "trace.green", 0.0, max_abs(green(trace_energy(e_, f)).matrix - principal(g, f)));
      const Matrix h = hitting_matrix(e_, f);
      Matrix gf(ix(n_), ix(f.size()));
      for (std::size_t j = 0; j < f.size(); ++j) gf.col(ix(j)) = g.col(ix(f[j]));
      exact(out, "gff.harmonic_projection", 0.0, max_abs(gf - h * principal(g, f)));
    }

    const CMatrix gw = twisted_green(e_, Current(n_));
    exact(out, "twisted.zero_current", 0.0, (gw - g.cast<Complex>()).cwiseAbs().maxCoeff());
    exact(out, "dynkin.zero_chi", g(ix(x0_), ix(x1_)), dynkin_exact(e_, x0_, x1_, Vector::Zero(ix(n_))));

    Matrix gl = Matrix::Zero(ix(n_), ix(n_));
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = 0; y < n_; ++y)
        if (x != y && e_.conductance()(ix(x), ix(y)) > 0.0) gl(ix(x), ix(y)) = 0.3;
    const auto ll = link_laplace_exact(e_, gl, 1.0);
    exact(out, "link_laplace.k_form", ll.canonical, ll.k_form);

    if (n_ <= 8) {
      const auto trees = enumerate_spanning_trees(e_);
      double total = 0.0, tll = 0.0;
      const Matrix tg = tree_weights(n_);
      for (const auto& t : trees) {
        const double p = tree_probability(e_, t);
        total += p;
        double s = 0.0;
        for (std::size_t x = 0; x < n_; ++x) s += tg(ix(x), ix(t.parent[x]));
        tll += p * std::exp(-s);
      }
      exact(out, "trees.total_probability", 1.0, total);
      exact(out, "trees.link_laplace", tll, tree_link_laplace_exact(e_, tg));
      for (std::size_t m = 1; m <= std::min<std::size_t>(2, links.size()); ++m) {
        std::vector<Link> sub(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(m));
        double enumerated = 0.0;
        for (const auto& t : trees)
          if (std::all_of(sub.begin(), sub.end(), [&](Link l) { return t.contains(l); }))
            enumerated += tree_probability(e_, t);
        exact(out, "trees.transfer_current." + std::to_string(m), enumerated, transfer_current_inclusion(e_, sub));
      }
      double be_total = 0.0;
      for (const auto& eta : enumerate_self_avoiding_paths(e_, x0_)) be_total += be_mass_exact(e_, x0_, eta);
      exact(out, "be.completeness", 1.0, be_total);
    }
  });
}

void Runner::finite_difference() {
  group("finite-difference", [&](Stream&, std::vector<IdentityRow>& out) {
    const Matrix g = green(e_).matrix;
    const double h = 1e-5;
    for (std::size_t x = 0; x < n_; ++x) {
      Vector kp = e_.killing(), km = e_.killing();
      kp(ix(x)) += h;
      km(ix(x)) -= h;
      if (km(ix(x)) < 0.0) km(ix(x)) = e_.killing()(ix(x));
      const double step = kp(ix(x)) - km(ix(x));
      const double d = (log_zeta(EnergyForm(e_.names(), e_.conductance(), kp)) -
                        log_zeta(EnergyForm(e_.names(), e_.conductance(), km))) / step;
      out.push_back(exact_row("fd.dlogz_dkappa." + e_.name(x), -g(ix(x), ix(x)), d, o_.fd_tol));
    }
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = x + 1; y < n_; ++y) {
        const double c = e_.conductance()(ix(x), ix(y));
        if (c <= 0.0) continue;
        const double d = (edge_count_generating(e_, x, y, 1.0 + h) - edge_count_generating(e_, x, y, 1.0 - h)) / (2 * h);
        out.push_back(exact_row("fd.edge_count." + e_.name(x) + "-" + e_.name(y), g(ix(x), ix(y)) * c, d, o_.fd_tol));
      }
  });
}

void Runner::soup() {
  const LoopSampler sampler(e_);
  for (double alpha : {1.0, 2.0}) {
    const std::string tag = alpha == 1.0 ? "soup.alpha1" : "soup.alpha2";
    group(tag, [&](Stream& rng, std::vector<IdentityRow>& out) {
      const double s = 0.5;
      const bool pair = n_ >= 2 && e_.conductance()(ix(x0_), ix(x1_)) > 0.0;
      Accumulator lap, m1, m2, avoid, joint, nvisit, edge, multi;
      for (std::size_t i = 0; i < o_.samples; ++i) {
        const auto ens = sampler.sample_soup(alpha, rng);
        const double l = occupation_field(ens).values(ix(x0_));
        lap.add(std::exp(-0.7 * l));
        m1.add(l);
        m2.add(l * l);
        bool hit = false, both = false;
        double visits_x0 = 0.0, edges = 0.0, mo = 0.0;
        for (const auto& lp : ens.loops) {
          const bool v0 = visits(lp, x0_);
          hit = hit || v0;
          both = both || (v0 && visits(lp, x1_));
          visits_x0 += evaluate(lp, VisitCount{x0_});
          if (pair) {
            edges += evaluate(lp, EdgeCount{x0_, x1_});
            mo += evaluate(lp, MultiOccupation{{x0_, x1_}});
          }
        }
        avoid.add(hit ? 0.0 : 1.0);
        joint.add(both ? 1.0 : 0.0);
        nvisit.add(std::pow(s, visits_x0 + alpha));
        edge.add(edges);
        multi.add(mo);
      }
      const Vector d0 = unit(n_, x0_, 1.0);
      const Matrix g = green(e_).matrix;
      mc(out, tag + ".laplace", occupation_laplace_exact(e_, unit(n_, x0_, 0.7), alpha), lap);
      mc(out, tag + ".moment1", occupation_moment_exact(e_, d0, 1, alpha), m1);
      mc(out, tag + ".moment2", occupation_moment_exact(e_, d0, 2, alpha), m2);
      mc(out, tag + ".avoidance", avoidance_probability(e_, {x0_}, alpha), avoid);
      mc(out, tag + ".nvisit", nvisit_generating_exact(e_, {x0_}, {s}, alpha), nvisit);
      if (n_ >= 2) mc(out, tag + ".joint_visit", joint_visit_probability(e_, x0_, x1_, alpha), joint);
      if (pair) {
        mc(out, tag + ".edge_count", alpha * g(ix(x0_), ix(x1_)) * e_.conductance()(ix(x0_), ix(x1_)), edge);
        mc(out, tag + ".multi_occupation", alpha * g(ix(x0_), ix(x1_)) * g(ix(x1_), ix(x0_)), multi);
      }
    });
  }
}

void Runner::dynkin() {
  const auto cs = chis();
  const LoopSampler sampler(e_);
  const FieldSampler fields(e_);
  const Matrix g = green(e_).matrix;
  const double g01 = g(ix(x0_), ix(x1_));
  const double target = dynkin_exact(e_, x0_, x1_, cs[0]);
  Estimate loops_b, field_b;

  group("dynkin.loops", [&](Stream& rng, std::vector<IdentityRow>& out) {
    const BridgeSampler bridge(e_, x1_);
    std::vector<Accumulator> lap(cs.size());
    Accumulator b;
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto ens = sampler.sample_soup(1.0, rng);
      const Vector occ = occupation_field(ens).values;
      for (std::size_t k = 0; k < cs.size(); ++k) lap[k].add(std::exp(-occ.dot(cs[k])));
      b.add(dynkin_loop_sample(ens, bridge.sample(x0_, rng), g01, cs[0]));
    }
    for (std::size_t k = 0; k < cs.size(); ++k)
      mc(out, "dynkin.soup_laplace.chi" + std::to_string(k + 1), occupation_laplace_exact(e_, cs[k], 1.0), lap[k]);
    mc(out, "dynkin.bridge.loops", target, b);
    loops_b = b.estimate();
  });

  group("dynkin.field", [&](Stream& rng, std::vector<IdentityRow>& out) {
    std::vector<Accumulator> lap(cs.size());
    Accumulator m1, m2, b, w1, w2, w12;
    const double sigma = g(ix(x0_), ix(x0_));
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto phi = fields.sample(rng);
      const Vector v = phi.half_square();
      for (std::size_t k = 0; k < cs.size(); ++k) lap[k].add(std::exp(-v.dot(cs[k])));
      const double v0 = v(ix(x0_));
      m1.add(v0);
      m2.add(v0 * v0);
      b.add(dynkin_field_sample(phi, x0_, x1_, cs[0]));
      const double a1 = wick_power(v0, sigma, 1), a2 = wick_power(v0, sigma, 2);
      w1.add(a1);
      w2.add(a2);
      w12.add(a1 * a2);
    }
    for (std::size_t k = 0; k < cs.size(); ++k)
      mc(out, "dynkin.field_laplace.chi" + std::to_string(k + 1), occupation_laplace_exact(e_, cs[k], 1.0), lap[k]);
    const Vector d0 = unit(n_, x0_, 1.0);
    mc(out, "dynkin.field_moment1", occupation_moment_exact(e_, d0, 1, 1.0), m1);
    mc(out, "dynkin.field_moment2", occupation_moment_exact(e_, d0, 2, 1.0), m2);
    mc(out, "dynkin.bridge.field", target, b);
    mc(out, "wick.mean1", 0.0, w1);
    mc(out, "wick.mean2", 0.0, w2);
    mc(out, "wick.orthogonal12", 0.0, w12);
    field_b = b.estimate();
  });

  group("dynkin.agreement", [&](Stream&, std::vector<IdentityRow>& out) {
    out.push_back(mc_difference_row("dynkin.bridge.agreement", loops_b, field_b, o_.z_max));
  });
}

void Runner::wilson() {
  const auto links = default_links(e_);
  const bool enumerable = n_ <= 8;
  std::vector<SpanningTree> trees;
  if (enumerable) trees = enumerate_spanning_trees(e_);
  std::map<std::vector<std::size_t>, std::size_t> tree_index;
  for (std::size_t i = 0; i < trees.size(); ++i) tree_index[trees[i].parent] = i;
  const Matrix tg = tree_weights(n_);
  const bool pair = n_ >= 2 && e_.conductance()(ix(x0_), ix(x1_)) > 0.0;
  constexpr std::size_t kCap = 8;
  std::vector<std::uint64_t> erased_hist(kCap + 1, 0), soup_hist(kCap + 1, 0);
  std::vector<std::uint64_t> forward_counts(trees.size(), 0), reverse_counts(trees.size(), 0);

  std::vector<std::size_t> order(n_);
  for (std::size_t i = 0; i < n_; ++i) order[i] = i;

  group("wilson", [&](Stream& rng, std::vector<IdentityRow>& out) {
    Accumulator inclusion, laplace, traversed;
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto w = loopsoup::wilson(e_, order, rng);
      if (enumerable) ++forward_counts[tree_index.at(w.tree.parent)];
      if (!links.empty()) inclusion.add(w.tree.contains(links[0]) ? 1.0 : 0.0);
      double s = 0.0;
      for (std::size_t x = 0; x < n_; ++x) s += tg(ix(x), ix(w.tree.parent[x]));
      laplace.add(std::exp(-s));
      if (pair) {
        const double t = traversals(w.erased, x0_, x1_);
        traversed.add(t);
        ++erased_hist[std::min(static_cast<std::size_t>(t), kCap)];
      }
    }
    if (!links.empty()) mc(out, "wilson.edge_inclusion", transfer_current_inclusion(e_, {links[0]}), inclusion);
    mc(out, "wilson.tree_link_laplace", tree_link_laplace_exact(e_, tg), laplace);
    if (pair)
      mc(out, "wilson.erased_traversals",
         2.0 * green(e_).matrix(ix(x0_), ix(x1_)) * e_.conductance()(ix(x0_), ix(x1_)), traversed);
    if (enumerable) {
      std::vector<std::uint64_t> obs = forward_counts;
      std::vector<double> exp;
      for (const auto& t : trees) exp.push_back(tree_probability(e_, t));
      merge_sparse(obs, exp);
      out.push_back(chi_squared_row("wilson.tree_law", chi_squared(obs, exp), o_.p_min, o_.samples));
    }
  });

  if (enumerable) {
    group("wilson.reversed", [&](Stream& rng, std::vector<IdentityRow>& out) {
      const std::vector<std::size_t> rev(order.rbegin(), order.rend());
      for (std::size_t i = 0; i < o_.samples; ++i) ++reverse_counts[tree_index.at(loopsoup::wilson(e_, rev, rng).tree.parent)];
      out.push_back(chi_squared_row("wilson.ordering_invariance", chi_squared_homogeneity(forward_counts, reverse_counts),
                                    o_.p_min, o_.samples));
    });
  }

  if (pair) {
    group("wilson.soup_loops", [&](Stream& rng, std::vector<IdentityRow>& out) {
      const LoopSampler sampler(e_);
      for (std::size_t i = 0; i < o_.samples; ++i) {
        const double t = traversals(sampler.sample_soup(1.0, rng).loops, x0_, x1_);
        ++soup_hist[std::min(static_cast<std::size_t>(t), kCap)];
      }
      out.push_back(chi_squared_row("wilson.erased_loops", chi_squared_homogeneity(erased_hist, soup_hist), o_.p_min,
                                    o_.samples));
    });
  }

  if (n_ <= 10) {
    group("be", [&](Stream& rng, std::vector<IdentityRow>& out) {
      const auto paths = enumerate_self_avoiding_paths(e_, x0_);
      std::map<std::vector<std::size_t>, std::size_t> index;
      std::vector<double> exp;
      std::size_t mode = 0;
      for (std::size_t i = 0; i < paths.size(); ++i) {
        index[paths[i]] = i;
        exp.push_back(be_mass_exact(e_, x0_, paths[i]));
        if (exp[i] > exp[mode]) mode = i;
      }
      const Vector chi = chis()[0];
      const VertexSet eta(paths[mode].begin(), paths[mode].end() - 1);
      std::vector<std::uint64_t> obs(paths.size(), 0);
      Accumulator conditional;
      for (std::size_t i = 0; i < o_.samples; ++i) {
        const Path p = sample_path_to_death(e_, x0_, rng);
        const auto sk = loop_erase(p).skeleton.states;
        const auto k = index.at(sk);
        ++obs[k];
        if (k == mode) conditional.add(std::exp(-path_occupation(p, n_).dot(chi)));
      }
      const double cond_exact = std::exp(log_det_spd(principal(green_chi(e_, chi).matrix, eta)) -
                                         log_det_spd(principal(green(e_).matrix, eta)));
      merge_sparse(obs, exp);
      out.push_back(chi_squared_row("be.loop_erased_law", chi_squared(obs, exp), o_.p_min, o_.samples));
      mc(out, "be.conditional_laplace", cond_exact, conditional);
    });
  }
}

void Runner::currents() {
  Current omega(n_);
  if (o_.current) {
    omega = *o_.current;
    omega.check_support(e_);
  } else {
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t y = x + 1; y < n_; ++y)
        if (e_.conductance()(ix(x), ix(y)) > 0.0) omega.set(x, y, std::numbers::pi);
  }
  bool integer = true;
  try {
    check_integer_winding(e_, omega);
  } catch (const ModelError&) {
    integer = false;
  }
  const LoopSampler sampler(e_);

  group("currents", [&](Stream& rng, std::vector<IdentityRow>& out) {
    const Complex exact_value = current_laplace_exact(e_, omega, 1.0);
    exact(out, "currents.zero_identity", 1.0, current_laplace_exact(e_, Current(n_), 1.0).real());
    Accumulator re, im;
    for (std::size_t i = 0; i < o_.samples; ++i) {
      double total = 0.0;
      for (const auto& l : sampler.sample_soup(1.0, rng).loops) total += loop_integral(l, omega);
      re.add(std::cos(total));
      im.add(std::sin(total));
    }
    mc(out, "currents.laplace", exact_value.real(), re);
    mc(out, "currents.laplace_imag", 0.0, im);
  });

  if (integer && sampler.mass() > 0.0) {
    group("currents.winding", [&](Stream& rng, std::vector<IdentityRow>& out) {
      Accumulator acc;
      for (std::size_t i = 0; i < o_.samples; ++i)
        acc.add(std::abs(loop_integral(sampler.sample_loop(rng), omega)) > 0.5 ? sampler.mass() : 0.0);
      mc(out, "currents.winding_mass", winding_nonzero_mass(e_, omega), acc);
    });
  }
}

void Runner::trace() {
  if (n_ < 2) return;
  const VertexSet f = half();
  const EnergyForm ef = trace_energy(e_, f);
  const auto nf = f.size();
  const Vector chi_f = Vector::Constant(ix(nf), 0.5);
  const double lap_exact = occupation_laplace_exact(ef, chi_f, 1.0);
  const double mass_exact = loop_mass_nontrivial(ef);
  const Matrix gf = green(ef).matrix;
  const bool pair = ef.conductance()(0, 1) > 0.0;
  const double edge_exact = gf(0, 1) * ef.conductance()(0, 1);
  Estimate traced[3], direct[3];

  auto summarize = [&](const std::vector<LoopSample>& loops, const Vector& occ, Accumulator* acc) {
    double count = 0.0, edges = 0.0;
    for (const auto& l : loops) {
      if (l.loop.length() < 2) continue;
      count += 1.0;
      edges += evaluate(l, EdgeCount{0, 1});
    }
    acc[0].add(std::exp(-occ.dot(chi_f)));
    acc[1].add(count);
    acc[2].add(edges);
  };
  const char* names[3] = {"laplace", "loop_count", "edge_count"};
  const double exacts[3] = {lap_exact, mass_exact, edge_exact};

  group("trace.traced", [&](Stream& rng, std::vector<IdentityRow>& out) {
    const LoopSampler sampler(e_);
    Accumulator acc[3];
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto ens = sampler.sample_soup(1.0, rng);
      std::vector<LoopSample> loops;
      for (const auto& l : ens.loops)
        if (auto t = loop_trace(l, f)) loops.push_back(std::move(*t));
      summarize(loops, restrict(occupation_field(ens).values, f), acc);
    }
    for (int k = 0; k < 3; ++k) {
      if (k == 2 && !pair) continue;
      mc(out, std::string("trace.traced.") + names[k], exacts[k], acc[k]);
      traced[k] = acc[k].estimate();
    }
  });
  group("trace.direct", [&](Stream& rng, std::vector<IdentityRow>& out) {
    const LoopSampler sampler(ef);
    Accumulator acc[3];
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto ens = sampler.sample_soup(1.0, rng);
      summarize(ens.loops, occupation_field(ens).values, acc);
    }
    for (int k = 0; k < 3; ++k) {
      if (k == 2 && !pair) continue;
      mc(out, std::string("trace.direct.") + names[k], exacts[k], acc[k]);
      direct[k] = acc[k].estimate();
    }
  });
  group("trace.agreement", [&](Stream&, std::vector<IdentityRow>& out) {
    for (int k = 0; k < 3; ++k) {
      if (k == 2 && !pair) continue;
      out.push_back(mc_difference_row(std::string("trace.agreement.") + names[k], traced[k], direct[k], o_.z_max));
    }
  });
}

void Runner::rn() {
  const EnergyForm ep = e_.with_conductance_keep_lambda(0.8 * e_.conductance());
  const auto weight = RadonNikodym::between(e_, ep);
  const LoopSampler sampler(e_);
  group("rn", [&](Stream& rng, std::vector<IdentityRow>& out) {
    Accumulator w, avoid;
    const bool pair = n_ >= 2 && e_.conductance()(ix(x0_), ix(x1_)) > 0.0;
    for (std::size_t i = 0; i < o_.samples; ++i) {
      const auto ens = sampler.sample_soup(1.0, rng);
      w.add(radon_nikodym_weight(ens, weight));
      if (pair) {
        bool used = false;
        for (const auto& l : ens.loops)
          used = used || evaluate(l, EdgeCount{x0_, x1_}) + evaluate(l, EdgeCount{x1_, x0_}) > 0.0;
        avoid.add(used ? 0.0 : 1.0);
      }
    }
    mc(out, "rn.weight", std::exp(log_zeta_ratio(e_, ep)), w);
    if (pair) mc(out, "rn.link_avoidance", link_avoidance_probability(e_, {Link{x0_, x1_}}, 1.0), avoid);
  });
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"exact-only", "finite-difference", "soup", "dynkin", "wilson",
                                              "currents",   "trace",             "rn",   "all"};
  return names;
}

IdentityReport run_suite(const EnergyForm& e, std::string_view suite, const SuiteOptions& options) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw std::invalid_argument("unknown suite '" + std::string(suite) + "'");
  if (options.samples < 2 && suite != "exact-only" && suite != "finite-difference")
    throw std::invalid_argument("Monte Carlo suites need at least two samples");
  Runner r(e, options);
  const bool all = suite == "all";
  if (all || suite == "exact-only") r.exact_only();
  if (all || suite == "finite-difference") r.finite_difference();
  if (all || suite == "soup") r.soup();
  if (all || suite == "dynkin") r.dynkin();
  if (all || suite == "wilson") r.wilson();
  if (all || suite == "currents") r.currents();
  if (all || suite == "trace") r.trace();
  if (all || suite == "rn") r.rn();
  return r.finish(suite);
}

IdentityReport run_suite(const EnergyForm& e, std::string_view suite, std::size_t n, std::uint64_t seed, double tol) {
  SuiteOptions o;
  o.samples = n;
  o.seed = seed;
  o.tol = tol;
  return run_suite(e, suite, o);
}

EnergyForm random_energy_form(Stream& rng, std::size_t n) {
  if (n == 0) throw ModelError("random energy form needs at least one vertex");
  Matrix c = Matrix::Zero(ix(n), ix(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y)
      if (rng.uniform() < 0.5) c(ix(x), ix(y)) = c(ix(y), ix(x)) = 0.5 + 1.5 * rng.uniform();
  Vector kappa(ix(n));
  for (std::size_t x = 0; x < n; ++x) kappa(ix(x)) = 0.1 + 1.4 * rng.uniform();
  std::vector<std::string> names;
  for (std::size_t x = 0; x < n; ++x) names.push_back("v" + std::to_string(x));
  return EnergyForm(std::move(names), std::move(c), std::move(kappa));
}

}  // namespace loopsoup
