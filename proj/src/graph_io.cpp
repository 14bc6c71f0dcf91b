#include "loopsoup/graph_io.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace loopsoup {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::string_view source, const std::string& what) {
  throw InputError(std::string(source) + ": " + what);
}

const json& field(const json& obj, const char* key, std::string_view source, const std::string& where) {
  if (!obj.is_object()) fail(source, where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(source, where + ": missing field '" + key + "'");
  return *it;
}

std::string as_name(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_string()) fail(source, where + ": expected a vertex name string");
  return v.get<std::string>();
}

double as_number(const json& v, std::string_view source, const std::string& where) {
  if (!v.is_number()) fail(source, where + ": expected a number");
  return v.get<double>();
}

}  // namespace

GraphFile parse_graph(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // The library message carries the line and column.
    fail(source, e.what());
  }
  if (!doc.is_object()) fail(source, "top level: expected an object");
  for (const auto& [key, _] : doc.items())
    if (key != "vertices" && key != "edges" && key != "kappa" && key != "currents")
      fail(source, "top level: unknown field '" + key + "'");

  const json& jv = field(doc, "vertices", source, "top level");
  if (!jv.is_array() || jv.empty()) fail(source, "vertices: expected a nonempty array");
  std::vector<std::string> vertices;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const auto where = "vertices[" + std::to_string(i) + "]";
    auto name = as_name(jv[i], source, where);
    if (name.empty() || name == "Delta") fail(source, where + ": reserved or empty name");
    if (!seen.insert(name).second) fail(source, where + ": duplicate vertex '" + name + "'");
    vertices.push_back(std::move(name));
  }
  auto known = [&](const std::string& name, const std::string& where) {
    if (!seen.count(name)) fail(source, where + ": unknown vertex '" + name + "'");
  };

  std::vector<ConductanceEntry> edges;
  if (doc.contains("edges")) {
    const json& je = doc["edges"];
    if (!je.is_array()) fail(source, "edges: expected an array");
    std::set<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < je.size(); ++i) {
      const auto where = "edges[" + std::to_string(i) + "]";
      ConductanceEntry c;
      c.u = as_name(field(je[i], "u", source, where), source, where + ".u");
      c.v = as_name(field(je[i], "v", source, where), source, where + ".v");
      c.value = as_number(field(je[i], "C", source, where), source, where + ".C");
      known(c.u, where + ".u");
      known(c.v, where + ".v");
      if (c.u == c.v) fail(source, where + ": self-loop on '" + c.u + "'");
      if (!(c.value >= 0.0)) fail(source, where + ".C: conductance must be nonnegative");
      if (!pairs.insert(std::minmax(c.u, c.v)).second) fail(source, where + ": duplicate edge " + c.u + "-" + c.v);
      edges.push_back(std::move(c));
    }
  }

  std::map<std::string, double> kappa;
  if (doc.contains("kappa")) {
    const json& jk = doc["kappa"];
    if (!jk.is_object()) fail(source, "kappa: expected an object");
    for (const auto& [name, value] : jk.items()) {
      const auto where = "kappa." + name;
      known(name, where);
      const double k = as_number(value, source, where);
      if (!(k >= 0.0)) fail(source, where + ": killing must be nonnegative");
      kappa[name] = k;
    }
  }

  std::optional<EnergyForm> form;
  try {
    form = EnergyForm::build(vertices, edges, kappa);
  } catch (const ModelError& e) {
    fail(source, e.what());
  }

  GraphFile g{*form, std::nullopt};
  if (doc.contains("currents")) {
    const json& jc = doc["currents"];
    if (!jc.is_array()) fail(source, "currents: expected an array");
    Current omega(form->size());
    for (std::size_t i = 0; i < jc.size(); ++i) {
      const auto where = "currents[" + std::to_string(i) + "]";
      const auto u = as_name(field(jc[i], "u", source, where), source, where + ".u");
      const auto v = as_name(field(jc[i], "v", source, where), source, where + ".v");
      known(u, where + ".u");
      known(v, where + ".v");
      omega.set(form->index(u), form->index(v), as_number(field(jc[i], "omega", source, where), source, where + ".omega"));
    }
    try {
      omega.check_support(*form);
    } catch (const ModelError& e) {
      fail(source, std::string("currents: ") + e.what());
    }
    g.current = std::move(omega);
  }
  return g;
}

GraphFile load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str(), path.string());
}

nlohmann::json graph_to_json(const EnergyForm& e, const std::optional<Current>& current) {
  json doc;
  doc["vertices"] = e.names();
  auto edges = json::array();
  const auto n = e.size();
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      const double c = e.conductance(x, y);
      if (c > 0.0) edges.push_back({{"u", e.name(x)}, {"v", e.name(y)}, {"C", c}});
    }
  doc["edges"] = std::move(edges);
  json kappa = json::object();
  for (std::size_t x = 0; x < n; ++x) kappa[e.name(x)] = e.killing()(static_cast<Eigen::Index>(x));
  doc["kappa"] = std::move(kappa);
  if (current) {
    auto cur = json::array();
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y)
        if ((*current)(x, y) != 0.0) cur.push_back({{"u", e.name(x)}, {"v", e.name(y)}, {"omega", (*current)(x, y)}});
    doc["currents"] = std::move(cur);
  }
  return doc;
}

std::string serialize_graph(const EnergyForm& e, const std::optional<Current>& current) {
  return graph_to_json(e, current).dump(2) + "\n";
}

nlohmann::json to_json(const EnergyForm& e, const LoopSample& l) {
  json cycle = json::array();
  for (auto v : l.loop.cycle()) cycle.push_back(e.name(v));
  return {{"cycle", std::move(cycle)}, {"holdings", l.holding}};
}

nlohmann::json to_json(const EnergyForm& e, const LoopEnsemble& ens) {
  json loops = json::array();
  for (const auto& l : ens.loops) loops.push_back(to_json(e, l));
  json trivial = json::object();
  for (std::size_t x = 0; x < e.size(); ++x) trivial[e.name(x)] = ens.trivial_occupation(static_cast<Eigen::Index>(x));
  return {{"alpha", ens.alpha}, {"loops", std::move(loops)}, {"trivial", std::move(trivial)}};
}

nlohmann::json to_json(const EnergyForm& e, const SpanningTree& t) {
  json parent = json::object();
  for (std::size_t x = 0; x < t.parent.size(); ++x) parent[e.name(x)] = e.name(t.parent[x]);
  return {{"parent", std::move(parent)}};
}

nlohmann::json to_json(const EnergyForm& e, const GaussField& f) {
  json re = json::object(), im = json::object();
  for (std::size_t x = 0; x < e.size(); ++x) {
    re[e.name(x)] = f.values(static_cast<Eigen::Index>(x)).real();
    im[e.name(x)] = f.values(static_cast<Eigen::Index>(x)).imag();
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

nlohmann::json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace loopsoup
