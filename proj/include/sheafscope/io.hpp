#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sheafscope/ground_topology.hpp"
#include "sheafscope/inconsistency.hpp"
#include "sheafscope/model_library.hpp"
#include "sheafscope/sheaf_core.hpp"

namespace sheafscope {

/// A dataset read from `id,v1,...,vr` CSV: the ground set in row order and
/// the global section over it.
struct Dataset {
  GroundSet ground;
  Section global;
};

Dataset parse_data_csv(std::istream& in);
Dataset read_data_csv(const std::filesystem::path& path);

/// Subbasis JSON: an object mapping set name to an array of labels. File
/// order of the names is kept.
std::vector<NamedSubset> parse_subbasis_json(const std::string& text);
std::vector<NamedSubset> read_subbasis_json(const std::filesystem::path& path);

/// Labels CSV `id,label`. Label spellings map through `aliases`.
using LabelAliases = std::map<std::string, ClassLabel>;
LabelAliases default_label_aliases();
std::vector<ClassLabel> parse_labels_csv(std::istream& in, const GroundSet& ground,
                                         const LabelAliases& aliases = default_label_aliases());
std::vector<ClassLabel> read_labels_csv(const std::filesystem::path& path, const GroundSet& ground,
                                        const LabelAliases& aliases = default_label_aliases());

/// Model config JSON: {"model":"average"}, {"model":"median"|"max"|"min"},
/// {"model":"identity"}, {"model":"graff","q":1},
/// {"model":"prototype","shots":3,"trials":100,"seed":1234}. Prototype labels
/// are attached separately.
ModelPresheafSpec parse_model_config(const nlohmann::json& config);

/// Assignment JSON: an array of {"set":[labels],"values":{label: number or
/// [numbers]}} entries, one per nonempty open set.
Assignment parse_assignment_json(const std::string& text, const Topology& topology, std::size_t dim);
Assignment read_assignment_json(const std::filesystem::path& path, const Topology& topology, std::size_t dim);

/// Rounds to 12 significant digits, the precision used in reports.
double round_report_number(double x);

nlohmann::ordered_json open_set_json(const Topology& topology, std::size_t ordinal);
nlohmann::ordered_json model_value_json(const ModelValue& m);
nlohmann::ordered_json report_json(const Topology& topology, const InconsistencyReport& report);
/// Serialized report; identical inputs give identical bytes.
std::string dump_report(const Topology& topology, const InconsistencyReport& report);

/// Attribution counts sorted by descending count, ties by subbasis order.
std::vector<std::pair<std::string, std::size_t>> ranked_attribution(const Topology& topology,
                                                                    const AttributionResult& result);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  std::size_t parts = 6;
  std::size_t per_part = 40;
  std::size_t dim = 16;
  double separation = 10.0;
  std::optional<std::size_t> defect_part;
  std::uint64_t seed = 0;
};

struct SynthData {
  std::vector<std::string> ids;
  /// Row-major, ids.size() x dim.
  std::vector<double> values;
  std::size_t dim = 0;
  std::vector<ClassLabel> labels;
  std::vector<NamedSubset> subbasis;
};

/// Per part, two unit-variance Gaussian clusters (s and ns) whose means are
/// `separation` apart along a random direction in a random 2-plane. The
/// defect part, if any, has its labels randomly permuted.
SynthData generate_synthetic(const SynthSpec& spec);

std::string data_csv(const SynthData& data);
std::string labels_csv(const SynthData& data);
std::string subbasis_json(const SynthData& data);

}  // namespace sheafscope
