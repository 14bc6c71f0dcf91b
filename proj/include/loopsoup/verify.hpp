#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/rng.hpp"

namespace loopsoup {

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};

/// Running mean and variance (Welford).
class Accumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  Estimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Mean and standard error of statistic(sampler(rng)) over n >= 2 draws.
template <class Sampler, class Statistic>
Estimate mc_estimate(Statistic&& statistic, Sampler&& sampler, std::size_t n, Stream& rng) {
  if (n < 2) throw std::invalid_argument("mc_estimate needs at least two draws");
  Accumulator acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(statistic(sampler(rng)));
  return acc.estimate();
}

/// Upper tail probability of Pearson's statistic with cells - 1 degrees of
/// freedom. A single cell gives 1; a nonpositive expected probability throws.
double chi_squared(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected);

/// Pools cells whose expected count is below min_expected into one cell
/// (dropped if its expected count is still zero).
void merge_sparse(std::vector<std::uint64_t>& observed, std::vector<double>& expected, double min_expected = 5.0);

/// Two-sample homogeneity test on histograms over the same cells; cells with
/// pooled count below min_count are merged.
double chi_squared_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                               double min_count = 10.0);

enum class RowKind { kExact, kMonteCarlo, kChiSquared };
std::string_view to_string(RowKind k);

/// One checked identity. Exact rows compare two deterministic routes at a
/// relative tolerance; Monte Carlo rows compare an estimate to the exact
/// value by z-score; chi-squared rows report a p-value against a threshold.
/// Fields that do not apply to a row kind are NaN (null in JSON, empty in CSV).
struct IdentityRow {
  std::string name;
  RowKind kind = RowKind::kExact;
  double exact = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;  // Monte Carlo rows
  double z = 0.0;               // Monte Carlo rows
  double p_value = 1.0;         // chi-squared rows
  double tolerance = 0.0;       // exact: relative tol; MC: z_max; chi-squared: p threshold
  bool pass = false;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double runtime_seconds = 0.0;  // not serialized unless timings are requested
};

struct IdentityReport {
  static constexpr int kSchemaVersion = 1;

  std::string suite;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double tolerance = 0.0;
  std::uint64_t graph_digest = 0;
  std::vector<IdentityRow> rows;  // sorted by name

  bool all_pass() const;
  nlohmann::json to_json(bool timings = false) const;
  std::string to_csv(bool timings = false) const;
};

struct SuiteOptions {
  std::size_t samples = 200000;
  std::uint64_t seed = 42;
  double tol = 1e-10;       // exact rows
  double fd_tol = 1e-6;     // finite-difference rows
  double z_max = 4.0;
  double p_min = 1e-3;      // chi-squared rows
  std::optional<Current> current;  // used by the "currents" suite
};

const std::vector<std::string>& suite_names();

/// Runs the named suite ("exact-only", "finite-difference", "soup",
/// "dynkin", "wilson", "currents", "trace", "rn", "all"). Each group of rows
/// draws from Stream::derive(seed, group name), so outcomes do not depend on
/// row order. Throws std::invalid_argument for an unknown suite.
IdentityReport run_suite(const EnergyForm& e, std::string_view suite, const SuiteOptions& options);
IdentityReport run_suite(const EnergyForm& e, std::string_view suite, std::size_t n, std::uint64_t seed, double tol);

/// Random energy form on n vertices: each pair linked with probability 1/2,
/// C ~ U(0.5, 2), kappa ~ U(0.1, 1.5).
EnergyForm random_energy_form(Stream& rng, std::size_t n);

// Row builders shared by the suites and the tests.
IdentityRow exact_row(std::string name, double exact, double value, double tol);
IdentityRow mc_row(std::string name, double exact, const Estimate& est, double z_max);
/// Difference of two independent estimates, expected zero.
IdentityRow mc_difference_row(std::string name, const Estimate& a, const Estimate& b, double z_max);
IdentityRow chi_squared_row(std::string name, double p_value, double p_min, std::size_t samples);

}  // namespace loopsoup
