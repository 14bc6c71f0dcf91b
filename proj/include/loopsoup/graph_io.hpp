#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "loopsoup/energy_form.hpp"
#include "loopsoup/gff.hpp"
#include "loopsoup/loops.hpp"
#include "loopsoup/paths_trees.hpp"

namespace loopsoup {

/// Malformed or inconsistent input file; the message names the line or field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph file:
///   {"vertices": [names], "edges": [{"u", "v", "C"}], "kappa": {name: value},
///    "currents": [{"u", "v", "omega"}]}
/// "kappa" entries default to 0 and "currents" is optional.
struct GraphFile {
  EnergyForm form;
  std::optional<Current> current;
};

GraphFile parse_graph(std::string_view text, std::string_view source = "<input>");
GraphFile load_graph(const std::filesystem::path& path);

/// Canonical form: vertices in order, edges x < y by index, kappa for every
/// vertex, currents x < y. Parsing the output and serializing again is a no-op.
nlohmann::json graph_to_json(const EnergyForm& e, const std::optional<Current>& current = std::nullopt);
std::string serialize_graph(const EnergyForm& e, const std::optional<Current>& current = std::nullopt);

nlohmann::json to_json(const EnergyForm& e, const LoopSample& l);
/// {"loops": [...], "trivial": {name: time}, "alpha": a}; one line per ensemble in JSONL output.
nlohmann::json to_json(const EnergyForm& e, const LoopEnsemble& ens);
/// {"parent": {name: parent name}} with the cemetery written as "Delta".
nlohmann::json to_json(const EnergyForm& e, const SpanningTree& t);
nlohmann::json to_json(const EnergyForm& e, const GaussField& f);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace loopsoup
