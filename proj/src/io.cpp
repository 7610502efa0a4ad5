#include "sheafscope/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sheafscope/error.hpp"

namespace sheafscope {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_fail(const std::string& what, std::size_t line) {
  throw Error(ErrorCode::ParseError, what + " (line " + std::to_string(line) + ")");
}

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty()) parse_fail("malformed number '" + field + "'", line);
  if (!std::isfinite(v)) parse_fail("non-finite value '" + field + "'", line);
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  return in;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

std::string format_double(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Data CSV

Dataset parse_data_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "data CSV is empty");
  if (header.front() != "id") parse_fail("data CSV header must start with 'id'", line_no);
  const std::size_t dim = header.size() - 1;
  if (dim == 0) parse_fail("data CSV needs at least one value column", line_no);

  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != dim + 1) {
      parse_fail("expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()), line_no);
    }
    if (fields[0].empty()) parse_fail("empty id", line_no);
    ids.push_back(fields[0]);
    for (std::size_t c = 1; c <= dim; ++c) values.push_back(parse_double(fields[c], line_no));
  }
  if (ids.empty()) throw Error(ErrorCode::ParseError, "data CSV has no rows");
  GroundSet ground;
  try {
    ground = GroundSet(std::move(ids));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Section global(OpenSet::full(ground.size()), dim, std::move(values));
  return {std::move(ground), std::move(global)};
}

Dataset read_data_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_data_csv(in);
}

// ---------------------------------------------------------------------------
// Subbasis JSON

std::vector<NamedSubset> parse_subbasis_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("subbasis JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "subbasis JSON must be an object of name -> labels");
  std::vector<NamedSubset> out;
  for (const auto& [name, labels] : j.items()) {
    if (!labels.is_array()) throw Error(ErrorCode::ParseError, "subbasis '" + name + "' must be an array");
    NamedSubset s{name, {}};
    for (const auto& l : labels) {
      if (!l.is_string()) throw Error(ErrorCode::ParseError, "subbasis '" + name + "' has a non-string label");
      s.labels.push_back(l.get<std::string>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<NamedSubset> read_subbasis_json(const std::filesystem::path& path) {
  return parse_subbasis_json(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Labels CSV

LabelAliases default_label_aliases() {
  return {{"s", ClassLabel::s},       {"stem", ClassLabel::s},      {"1", ClassLabel::s},
          {"ns", ClassLabel::ns},     {"no-stem", ClassLabel::ns},  {"nostem", ClassLabel::ns},
          {"0", ClassLabel::ns}};
}

std::vector<ClassLabel> parse_labels_csv(std::istream& in, const GroundSet& ground, const LabelAliases& aliases) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ClassLabel> labels(ground.size());
  std::vector<char> seen(ground.size(), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "id" || fields[1] != "label") {
        parse_fail("labels CSV header must be 'id,label'", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) parse_fail("expected 2 fields", line_no);
    auto idx = ground.index_of(fields[0]);
    if (!idx) parse_fail("unknown id '" + fields[0] + "'", line_no);
    auto it = aliases.find(fields[1]);
    if (it == aliases.end()) parse_fail("unknown label '" + fields[1] + "'", line_no);
    if (seen[*idx]) parse_fail("id '" + fields[0] + "' labeled twice", line_no);
    seen[*idx] = 1;
    labels[*idx] = it->second;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw Error(ErrorCode::ParseError, "no label for id '" + ground.label(i) + "'");
  }
  return labels;
}

std::vector<ClassLabel> read_labels_csv(const std::filesystem::path& path, const GroundSet& ground,
                                        const LabelAliases& aliases) {
  auto in = open_input(path);
  return parse_labels_csv(in, ground, aliases);
}

// ---------------------------------------------------------------------------
// Model config

ModelPresheafSpec parse_model_config(const json& config) {
  if (!config.is_object() || !config.contains("model") || !config["model"].is_string()) {
    throw Error(ErrorCode::ParseError, "model config needs a string field 'model'");
  }
  auto uint_field = [&](const char* key, std::uint64_t fallback) -> std::uint64_t {
    if (!config.contains(key)) return fallback;
    const auto& v = config[key];
    if (!v.is_number_unsigned()) {
      throw Error(ErrorCode::ParseError, std::string("model config field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  const auto model = config["model"].get<std::string>();
  if (model == "average") return ModelPresheafSpec::average();
  if (model == "identity") return ModelPresheafSpec::identity();
  if (model == "median") return ModelPresheafSpec::scalar_statistic(Statistic::Median);
  if (model == "max") return ModelPresheafSpec::scalar_statistic(Statistic::Max);
  if (model == "min") return ModelPresheafSpec::scalar_statistic(Statistic::Min);
  if (model == "graff") {
    const auto q = uint_field("q", 1);
    if (q < 1) throw Error(ErrorCode::ParseError, "graff model needs q >= 1");
    return ModelPresheafSpec::graff(q);
  }
  if (model == "prototype") {
    PrototypeParams p;
    p.shots = uint_field("shots", 3);
    p.trials = uint_field("trials", 100);
    p.seed = uint_field("seed", 0);
    if (p.shots < 1 || p.trials < 1) throw Error(ErrorCode::ParseError, "prototype shots and trials must be >= 1");
    ModelPresheafSpec s;
    s.family = ModelFamily::Prototype;
    s.prototype = std::move(p);
    return s;
  }
  throw Error(ErrorCode::ParseError, "unknown model '" + model + "'");
}

// ---------------------------------------------------------------------------
// Assignment JSON

Assignment parse_assignment_json(const std::string& text, const Topology& topology, std::size_t dim) {
  const json j = parse_json_text(text, "assignment JSON");
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "assignment JSON must be an array of sections");
  const GroundSet& ground = topology.ground();
  std::vector<std::optional<Section>> sections(topology.size());
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("set") || !entry.contains("values") || !entry["values"].is_object()) {
      throw Error(ErrorCode::ParseError, "assignment entries need 'set' and 'values'");
    }
    std::vector<std::string> labels;
    for (const auto& l : entry["set"]) labels.push_back(l.get<std::string>());
    const OpenSet domain = make_open_set(ground, labels);
    const std::size_t ordinal = topology.require_ordinal(domain);
    if (sections[ordinal]) throw Error(ErrorCode::ParseError, "open set given twice in assignment");

    const auto& vals = entry["values"];
    if (vals.size() != domain.count()) {
      throw Error(ErrorCode::DomainMismatch, "section values must cover exactly its open set");
    }
    std::vector<double> flat;
    flat.reserve(domain.count() * dim);
    for (auto m : domain.members()) {
      const auto& label = ground.label(m);
      if (!vals.contains(label)) throw Error(ErrorCode::DomainMismatch, "missing value for '" + label + "'");
      const auto& v = vals[label];
      if (v.is_number() && dim == 1) {
        flat.push_back(v.get<double>());
      } else if (v.is_array() && v.size() == dim) {
        for (const auto& x : v) flat.push_back(x.get<double>());
      } else {
        throw Error(ErrorCode::DimMismatch, "value for '" + label + "' has the wrong shape");
      }
    }
    sections[ordinal] = Section(domain, dim, std::move(flat));
  }
  std::vector<Section> out;
  out.reserve(sections.size());
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (sections[i]) {
      out.push_back(std::move(*sections[i]));
    } else if (topology.at(i).empty()) {
      out.push_back(Section::empty(ground.size(), dim));
    } else {
      throw Error(ErrorCode::DomainMismatch, "assignment lacks a section for open set " + std::to_string(i));
    }
  }
  return Assignment(topology, std::move(out));
}

Assignment read_assignment_json(const std::filesystem::path& path, const Topology& topology, std::size_t dim) {
  return parse_assignment_json(read_text_file(path), topology, dim);
}

// ---------------------------------------------------------------------------
// Report JSON

double round_report_number(double x) { return std::strtod(format_double(x, 12).c_str(), nullptr); }

ordered_json open_set_json(const Topology& topology, std::size_t ordinal) {
  return sorted_labels(topology.ground(), topology.at(ordinal));
}

namespace {

std::optional<ordered_json> parts_json(const Topology& topology, std::size_t ordinal) {
  const OpenSet& u = topology.at(ordinal);
  if (u.empty() || topology.subbasis().empty()) return std::nullopt;
  const auto parts = topology.parts_of(u);
  OpenSet covered(u.universe());
  std::vector<std::string> names;
  for (auto p : parts) {
    covered = covered | topology.subbasis()[p].set;
    names.push_back(topology.subbasis()[p].name);
  }
  if (covered != u) return std::nullopt;
  std::sort(names.begin(), names.end());
  return ordered_json(names);
}

ordered_json local_json(const Topology& topology, const LocalResult& r) {
  ordered_json j;
  j["value"] = r.defined ? ordered_json(round_report_number(r.value)) : ordered_json(nullptr);
  j["witness"] = r.witness ? open_set_json(topology, *r.witness) : ordered_json(nullptr);
  return j;
}

ordered_json skipped_json(const Topology& topology, const std::vector<SkippedSet>& skipped) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : skipped) {
    ordered_json e;
    e["set"] = open_set_json(topology, s.open);
    e["reason"] = s.reason;
    arr.push_back(std::move(e));
  }
  return arr;
}

}  // namespace

ordered_json model_value_json(const ModelValue& m) {
  struct Visitor {
    ordered_json operator()(const Null&) const { return nullptr; }
    ordered_json operator()(const Scalar& s) const { return round_report_number(s.value); }
    ordered_json operator()(const UnitScore& s) const { return round_report_number(s.value); }
    ordered_json operator()(const AffineSubspace& a) const {
      ordered_json j;
      ordered_json base = ordered_json::array();
      for (Eigen::Index i = 0; i < a.base.size(); ++i) base.push_back(round_report_number(a.base(i)));
      ordered_json basis = ordered_json::array();
      for (Eigen::Index c = 0; c < a.basis.cols(); ++c) {
        ordered_json col = ordered_json::array();
        for (Eigen::Index i = 0; i < a.basis.rows(); ++i) col.push_back(round_report_number(a.basis(i, c)));
        basis.push_back(std::move(col));
      }
      j["base"] = std::move(base);
      j["basis"] = std::move(basis);
      j["degenerate"] = a.degenerate;
      return j;
    }
    ordered_json operator()(const Section& s) const {
      ordered_json rows = ordered_json::array();
      for (std::size_t k = 0; k < s.size(); ++k) {
        ordered_json row = ordered_json::array();
        for (double v : s.row(k)) row.push_back(round_report_number(v));
        rows.push_back(std::move(row));
      }
      return rows;
    }
    ordered_json operator()(const Undefined& u) const { return ordered_json{{"undefined", u.reason}}; }
  };
  return std::visit(Visitor{}, m);
}

ordered_json report_json(const Topology& topology, const InconsistencyReport& report) {
  ordered_json root;
  ordered_json opens = ordered_json::array();
  for (const auto& r : report.opens) {
    ordered_json o;
    o["set"] = open_set_json(topology, r.open);
    if (auto parts = parts_json(topology, r.open)) o["parts"] = std::move(*parts);
    o["model"] = model_value_json(r.model);
    o["local"] = r.local.defined ? ordered_json(round_report_number(r.local.value)) : ordered_json(nullptr);
    o["witness"] = r.local.witness ? open_set_json(topology, *r.local.witness) : ordered_json(nullptr);
    ordered_json filtered = ordered_json::object();
    for (const auto& [level, f] : r.filtered) filtered[std::to_string(level)] = local_json(topology, f);
    o["filtered"] = std::move(filtered);
    o["skipped"] = skipped_json(topology, r.local.skipped);
    opens.push_back(std::move(o));
  }
  root["opens"] = std::move(opens);

  ordered_json global;
  global["value"] = report.global.at ? ordered_json(round_report_number(report.global.value)) : ordered_json(nullptr);
  global["at"] = report.global.at ? open_set_json(topology, *report.global.at) : ordered_json(nullptr);
  root["global"] = std::move(global);

  if (report.attribution) {
    ordered_json tally = ordered_json::object();
    for (std::size_t p = 0; p < topology.subbasis().size(); ++p) {
      tally[topology.subbasis()[p].name] = report.attribution->counts[p];
    }
    root["attribution"] = std::move(tally);
    ordered_json skipped = ordered_json::array();
    for (auto u : report.attribution->skipped) skipped.push_back(open_set_json(topology, u));
    root["attribution_skipped"] = std::move(skipped);
  }
  return root;
}

std::string dump_report(const Topology& topology, const InconsistencyReport& report) {
  return report_json(topology, report).dump(2) + "\n";
}

std::vector<std::pair<std::string, std::size_t>> ranked_attribution(const Topology& topology,
                                                                    const AttributionResult& result) {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (std::size_t p = 0; p < topology.subbasis().size(); ++p) {
    out.emplace_back(topology.subbasis()[p].name, result.counts[p]);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic files

std::string data_csv(const SynthData& data) {
  std::string out = "id";
  for (std::size_t c = 1; c <= data.dim; ++c) out += ",v" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    out += data.ids[i];
    for (std::size_t c = 0; c < data.dim; ++c) out += "," + format_double(data.values[i * data.dim + c], 17);
    out += '\n';
  }
  return out;
}

std::string labels_csv(const SynthData& data) {
  std::string out = "id,label\n";
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    out += data.ids[i] + (data.labels[i] == ClassLabel::s ? ",s\n" : ",ns\n");
  }
  return out;
}

std::string subbasis_json(const SynthData& data) {
  ordered_json j = ordered_json::object();
  for (const auto& part : data.subbasis) j[part.name] = part.labels;
  return j.dump(2) + "\n";
}

}  // namespace sheafscope
