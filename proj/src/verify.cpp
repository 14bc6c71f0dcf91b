#include "loopsoup/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

namespace loopsoup {

void Accumulator::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

Estimate Accumulator::estimate() const {
  Estimate e;
  e.n = n_;
  e.mean = mean_;
  if (n_ >= 2) {
    const double var = m2_ / static_cast<double>(n_ - 1);
    e.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(n_));
  }
  return e;
}

double chi_squared(const std::vector<std::uint64_t>& observed, const std::vector<double>& expected) {
  if (observed.size() != expected.size()) throw std::invalid_argument("chi_squared: cell count mismatch");
  if (observed.empty()) throw std::invalid_argument("chi_squared: no cells");
  double total_p = 0.0;
  double total_n = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw std::invalid_argument("chi_squared: expected probability must be positive");
    total_p += expected[i];
    total_n += static_cast<double>(observed[i]);
  }
  if (observed.size() == 1 || total_n == 0.0) return 1.0;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double m = total_n * expected[i] / total_p;
    const double d = static_cast<double>(observed[i]) - m;
    stat += d * d / m;
  }
  const double dof = static_cast<double>(observed.size() - 1);
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

void merge_sparse(std::vector<std::uint64_t>& observed, std::vector<double>& expected, double min_expected) {
  double total_p = 0.0, total_n = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    total_p += expected[i];
    total_n += static_cast<double>(observed[i]);
  }
  std::vector<std::uint64_t> obs;
  std::vector<double> exp;
  std::uint64_t pooled_obs = 0;
  double pooled_exp = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (total_n * expected[i] / total_p < min_expected) {
      pooled_obs += observed[i];
      pooled_exp += expected[i];
    } else {
      obs.push_back(observed[i]);
      exp.push_back(expected[i]);
    }
  }
  if (pooled_exp > 0.0) {
    obs.push_back(pooled_obs);
    exp.push_back(pooled_exp);
  }
  observed = std::move(obs);
  expected = std::move(exp);
}

double chi_squared_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                               double min_count) {
  if (a.size() != b.size()) throw std::invalid_argument("homogeneity: cell count mismatch");
  std::vector<double> ca, cb;
  double pa = 0.0, pb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (static_cast<double>(a[i] + b[i]) < min_count) {
      pa += static_cast<double>(a[i]);
      pb += static_cast<double>(b[i]);
    } else {
      ca.push_back(static_cast<double>(a[i]));
      cb.push_back(static_cast<double>(b[i]));
    }
  }
  if (pa + pb > 0.0) {
    ca.push_back(pa);
    cb.push_back(pb);
  }
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    na += ca[i];
    nb += cb[i];
  }
  if (ca.size() < 2 || na == 0.0 || nb == 0.0) return 1.0;
  const double total = na + nb;
  double stat = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double col = ca[i] + cb[i];
    const double ea = na * col / total, eb = nb * col / total;
    stat += (ca[i] - ea) * (ca[i] - ea) / ea + (cb[i] - eb) * (cb[i] - eb) / eb;
  }
  return boost::math::gamma_q(0.5 * static_cast<double>(ca.size() - 1), 0.5 * stat);
}

namespace {
// Serialized as null (JSON) or an empty cell (CSV).
constexpr double kNotApplicable = std::numeric_limits<double>::quiet_NaN();
}  // namespace

std::string_view to_string(RowKind k) {
  switch (k) {
    case RowKind::kExact: return "exact";
    case RowKind::kMonteCarlo: return "mc";
    case RowKind::kChiSquared: return "chi2";
  }
  return "?";
}

IdentityRow exact_row(std::string name, double exact, double value, double tol) {
  IdentityRow r;
  r.name = std::move(name);
  r.kind = RowKind::kExact;
  r.standard_error = r.z = r.p_value = kNotApplicable;
  r.exact = exact;
  r.estimate = value;
  r.tolerance = tol;
  r.pass = std::isfinite(value) && std::isfinite(exact) && std::abs(value - exact) <= tol * std::max(1.0, std::abs(exact));
  return r;
}

IdentityRow mc_row(std::string name, double exact, const Estimate& est, double z_max) {
  IdentityRow r;
  r.name = std::move(name);
  r.kind = RowKind::kMonteCarlo;
  r.p_value = kNotApplicable;
  r.exact = exact;
  r.estimate = est.mean;
  r.standard_error = est.standard_error;
  r.samples = est.n;
  r.tolerance = z_max;
  const double d = est.mean - exact;
  if (est.standard_error > 0.0)
    r.z = d / est.standard_error;
  else
    r.z = std::abs(d) <= 1e-12 * std::max(1.0, std::abs(exact)) ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), d);
  r.pass = std::isfinite(r.z) && std::abs(r.z) <= z_max;
  return r;
}

IdentityRow mc_difference_row(std::string name, const Estimate& a, const Estimate& b, double z_max) {
  Estimate diff;
  diff.mean = a.mean - b.mean;
  diff.standard_error = std::hypot(a.standard_error, b.standard_error);
  diff.n = std::min(a.n, b.n);
  return mc_row(std::move(name), 0.0, diff, z_max);
}

IdentityRow chi_squared_row(std::string name, double p_value, double p_min, std::size_t samples) {
  IdentityRow r;
  r.name = std::move(name);
  r.kind = RowKind::kChiSquared;
  r.standard_error = r.z = kNotApplicable;
  r.exact = p_min;
  r.estimate = p_value;
  r.p_value = p_value;
  r.tolerance = p_min;
  r.samples = samples;
  r.pass = p_value > p_min;
  return r;
}

bool IdentityReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const IdentityRow& r) { return r.pass; });
}

namespace {

nlohmann::json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

nlohmann::json IdentityReport::to_json(bool timings) const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["suite"] = suite;
  j["seed"] = seed;
  j["samples"] = samples;
  j["tolerance"] = tolerance;
  j["graph_digest"] = hex(graph_digest);
  j["all_pass"] = all_pass();
  auto arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["name"] = r.name;
    o["kind"] = std::string(to_string(r.kind));
    o["exact"] = number(r.exact);
    o["estimate"] = number(r.estimate);
    o["stderr"] = number(r.standard_error);
    o["z"] = number(r.z);
    o["p_value"] = number(r.p_value);
    o["tolerance"] = number(r.tolerance);
    o["pass"] = r.pass;
    o["seed"] = r.seed;
    o["samples"] = r.samples;
    if (timings) o["runtime_seconds"] = r.runtime_seconds;
    arr.push_back(std::move(o));
  }
  j["rows"] = std::move(arr);
  return j;
}

std::string IdentityReport::to_csv(bool timings) const {
  std::ostringstream os;
  os << "# schema_version=" << kSchemaVersion << " suite=" << suite << " seed=" << seed << " samples=" << samples
     << " graph_digest=" << hex(graph_digest) << "\n";
  os << "name,kind,exact,estimate,stderr,z,p_value,tolerance,pass,seed,samples";
  if (timings) os << ",runtime_seconds";
  os << "\n";
  for (const auto& r : rows) {
    os << r.name << ',' << to_string(r.kind) << ',' << csv_number(r.exact) << ',' << csv_number(r.estimate) << ','
       << csv_number(r.standard_error) << ',' << csv_number(r.z) << ',' << csv_number(r.p_value) << ','
       << csv_number(r.tolerance) << ',' << (r.pass ? "true" : "false") << ',' << r.seed << ',' << r.samples;
    if (timings) os << ',' << csv_number(r.runtime_seconds);
    os << "\n";
  }
  return os.str();
}

}  // namespace loopsoup
