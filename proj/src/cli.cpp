#include "loopsoup/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "loopsoup/exact.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/graph_io.hpp"
#include "loopsoup/kernels.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/paths_trees.hpp"
#include "loopsoup/verify.hpp"

namespace loopsoup::cli {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string link_name(const EnergyForm& e, Link l) { return "(" + e.name(l.from) + "," + e.name(l.to) + ")"; }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError(path + ": cannot open for writing");
  return f;
}

void print_rows(const IdentityReport& r, std::ostream& out) {
  for (const auto& row : r.rows) {
    out << (row.pass ? "PASS " : "FAIL ") << std::left << std::setw(36) << row.name << std::right << " exact="
        << std::setprecision(10) << row.exact << " estimate=" << row.estimate;
    if (row.kind == RowKind::kMonteCarlo) out << " stderr=" << row.standard_error << " z=" << std::setprecision(3) << row.z;
    if (row.kind == RowKind::kChiSquared) out << " p=" << std::setprecision(4) << row.p_value;
    out << "\n";
  }
}

int cmd_exact(const std::string& path, const std::vector<double>& chi, double alpha, std::ostream& out) {
  const auto g = load_graph(path);
  const auto& e = g.form;
  const auto n = e.size();
  const Matrix gm = green(e).matrix;
  out << std::fixed << std::setprecision(7);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) out << "G(" << e.name(x) << "," << e.name(y) << ") = " << gm(ix(x), ix(y)) << "\n";
  const auto k = transfer_matrix(e);
  for (std::size_t i = 0; i < k.links.size(); ++i)
    for (std::size_t j = 0; j < k.links.size(); ++j)
      out << "K(" << link_name(e, k.links[i]) << "," << link_name(e, k.links[j]) << ") = " << k.matrix(ix(i), ix(j))
          << "\n";
  out << "Z_e = " << zeta(e) << "\n";
  out << "loop_mass = " << loop_mass_nontrivial(e) << "\n";
  if (!chi.empty()) {
    if (chi.size() != n) throw InputError("--chi: expected " + std::to_string(n) + " values");
    Vector c(ix(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!(chi[i] >= 0.0)) throw InputError("--chi: values must be nonnegative");
      c(ix(i)) = chi[i];
    }
    out << "occupation_laplace(alpha=" << alpha << ") = " << occupation_laplace_exact(e, c, alpha) << "\n";
    const Matrix gc = green_chi(e, c).matrix;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        out << "G_chi(" << e.name(x) << "," << e.name(y) << ") = " << gc(ix(x), ix(y)) << "\n";
  }
  out.unsetf(std::ios::fixed);
  SuiteOptions o;
  const auto report = run_suite(e, "exact-only", o);
  print_rows(report, out);
  return report.all_pass() ? kOk : kIdentityFailure;
}

int cmd_soup(const std::string& path, double alpha, std::size_t samples, std::uint64_t seed, const std::string& out_path,
             std::ostream& out) {
  const auto g = load_graph(path);
  const auto& e = g.form;
  if (!(alpha > 0.0)) throw InputError("--alpha must be positive");
  const LoopSampler sampler(e);
  Stream rng(seed);
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  Accumulator count;
  std::vector<Accumulator> occ(e.size());
  for (std::size_t i = 0; i < samples; ++i) {
    const auto ens = sampler.sample_soup(alpha, rng);
    if (file) file << to_json(e, ens).dump() << "\n";
    count.add(static_cast<double>(ens.loops.size()));
    const Vector v = occupation_field(ens).values;
    for (std::size_t x = 0; x < e.size(); ++x) occ[x].add(v(ix(x)));
  }
  const Matrix gm = green(e).matrix;
  out << std::setprecision(7);
  out << "nontrivial_loops mean=" << count.estimate().mean << " exact=" << alpha * sampler.mass() << "\n";
  for (std::size_t x = 0; x < e.size(); ++x)
    out << "occupation(" << e.name(x) << ") mean=" << occ[x].estimate().mean << " stderr=" << occ[x].estimate().standard_error
        << " exact=" << alpha * gm(ix(x), ix(x)) << "\n";
  return kOk;
}

int cmd_tree(const std::string& path, std::size_t samples, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const auto g = load_graph(path);
  const auto& e = g.form;
  std::vector<std::size_t> order(e.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Stream rng(seed);
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::map<std::vector<std::size_t>, std::size_t> counts;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto w = wilson(e, order, rng);
    ++counts[w.tree.parent];
    if (file) {
      nlohmann::json loops = nlohmann::json::array();
      for (const auto& l : w.erased) loops.push_back(to_json(e, l));
      file << nlohmann::json{{"tree", to_json(e, w.tree)}, {"erased", std::move(loops)}}.dump() << "\n";
    }
  }
  out << std::setprecision(7);
  for (const auto& [parent, c] : counts) {
    SpanningTree t{parent};
    out << to_json(e, t)["parent"].dump() << " frequency=" << static_cast<double>(c) / static_cast<double>(samples)
        << " exact=" << tree_probability(e, t) << "\n";
  }
  return kOk;
}

int cmd_gff(const std::string& path, std::size_t samples, std::uint64_t seed, const std::string& out_path, std::ostream& out) {
  const auto g = load_graph(path);
  const auto& e = g.form;
  const FieldSampler sampler(e);
  Stream rng(seed);
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  const auto n = e.size();
  std::vector<Accumulator> v1(n), v2(n);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto phi = sampler.sample(rng);
    if (file) file << to_json(e, phi).dump() << "\n";
    const Vector v = phi.half_square();
    for (std::size_t x = 0; x < n; ++x) {
      v1[x].add(v(ix(x)));
      v2[x].add(v(ix(x)) * v(ix(x)));
    }
  }
  const Matrix gm = green(e).matrix;
  out << std::setprecision(7);
  for (std::size_t x = 0; x < n; ++x) {
    const double s = gm(ix(x), ix(x));
    out << "half_square(" << e.name(x) << ") mean=" << v1[x].estimate().mean << " exact=" << s
        << " second_moment=" << v2[x].estimate().mean << " exact=" << 2 * s * s << "\n";
  }
  return kOk;
}

int cmd_verify(const std::string& path, const std::string& suite, std::size_t samples, std::uint64_t seed, double tol,
               const std::string& prefix, bool timings, std::ostream& out) {
  const auto g = load_graph(path);
  SuiteOptions o;
  o.samples = samples;
  o.seed = seed;
  o.tol = tol;
  o.current = g.current;
  IdentityReport report;
  try {
    report = run_suite(g.form, suite, o);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (!prefix.empty()) {
    open_out(prefix + ".json") << report.to_json(timings).dump(2) << "\n";
    open_out(prefix + ".csv") << report.to_csv(timings);
  }
  print_rows(report, out);
  out << (report.all_pass() ? "all identities pass" : "identity failure") << "\n";
  return report.all_pass() ? kOk : kIdentityFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Markov loop ensembles: exact identities and samplers", "loopsoup"};
  app.require_subcommand(1);

  std::string graph, out_path, suite = "all";
  std::vector<double> chi;
  double alpha = 1.0, tol = 1e-10;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  bool timings = false;

  auto* exact = app.add_subcommand("exact", "Print G, K, Z_e and the exact identity table");
  exact->add_option("graph", graph, "Graph file")->required();
  exact->add_option("--chi", chi, "Nonnegative chi, one value per vertex")->delimiter(',');
  exact->add_option("--alpha", alpha, "Soup intensity for the Laplace transform");

  auto sampling = [&](CLI::App* sub) {
    sub->add_option("graph", graph, "Graph file")->required();
    sub->add_option("--samples", samples, "Number of independent samples")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Master seed")->required();
    sub->add_option("--out", out_path, "Output file");
  };
  auto* soup = app.add_subcommand("soup", "Sample loop soups");
  sampling(soup);
  soup->add_option("--alpha", alpha, "Intensity")->required();
  auto* tree = app.add_subcommand("tree", "Sample spanning trees with Wilson's algorithm");
  sampling(tree);
  auto* gff = app.add_subcommand("gff", "Sample the complex Gaussian field");
  sampling(gff);
  // verify is deterministic without --seed: it defaults to the suite seed 42.
  std::size_t verify_samples = SuiteOptions{}.samples;
  std::uint64_t verify_seed = SuiteOptions{}.seed;
  auto* verify = app.add_subcommand("verify", "Run an identity suite and write JSON/CSV reports");
  verify->add_option("graph", graph, "Graph file")->required();
  verify->add_option("--samples", verify_samples, "Samples per Monte Carlo row")->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_seed, "Master seed");
  verify->add_option("--out", out_path, "Report prefix: writes <prefix>.json and <prefix>.csv");
  verify->add_option("--suite", suite, "Suite name")->check(CLI::IsMember(suite_names()));
  verify->add_option("--tol", tol, "Relative tolerance for exact rows");
  verify->add_flag("--timings", timings, "Include per-row runtimes in reports");

  std::vector<std::string> argv_store{"loopsoup"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (*exact) return cmd_exact(graph, chi, alpha, out);
    if (*soup) return cmd_soup(graph, alpha, samples, seed, out_path, out);
    if (*tree) return cmd_tree(graph, samples, seed, out_path, out);
    if (*gff) return cmd_gff(graph, samples, seed, out_path, out);
    if (*verify) return cmd_verify(graph, suite, verify_samples, verify_seed, tol, out_path, timings, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace loopsoup::cli
