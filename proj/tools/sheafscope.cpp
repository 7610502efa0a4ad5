// sheafscope: measure how a model's fit varies across metadata-defined
// subpopulations of a dataset.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "sheafscope/error.hpp"
#include "sheafscope/ground_topology.hpp"
#include "sheafscope/inconsistency.hpp"
#include "sheafscope/io.hpp"
#include "sheafscope/model_library.hpp"
#include "sheafscope/sheaf_core.hpp"

namespace fs = std::filesystem;
using namespace sheafscope;

namespace {

struct RunConfig {
  std::string data;
  std::string subbasis;
  std::string labels;
  std::string model = R"({"model":"average"})";
  std::string assignment;
  std::vector<std::size_t> j_levels{1};
  std::size_t cap = kDefaultOpenCap;
  double tol = 0.0;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string out;
  std::string csv;
  std::string open;
};

std::string braces(const std::vector<std::string>& labels) {
  std::string s = "{";
  for (std::size_t i = 0; i < labels.size(); ++i) s += (i ? "," : "") + labels[i];
  return s + "}";
}

std::string describe(const Topology& t, std::size_t ordinal) {
  return braces(sorted_labels(t.ground(), t.at(ordinal)));
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

GroundSet ground_from_subbasis(const std::vector<NamedSubset>& subbasis) {
  std::vector<std::string> labels;
  std::unordered_set<std::string> seen;
  for (const auto& s : subbasis) {
    for (const auto& l : s.labels) {
      if (seen.insert(l).second) labels.push_back(l);
    }
  }
  return GroundSet(std::move(labels));
}

OpenSet parse_open_arg(const Topology& t, const std::string& arg) {
  for (const auto& e : t.subbasis()) {
    if (e.name == arg) return e.set;
  }
  if (arg == "{}" || arg.empty()) return OpenSet(t.ground().size());
  std::vector<std::string> labels;
  std::stringstream ss(arg);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) labels.push_back(item);
  }
  return make_open_set(t.ground(), labels);
}

ModelPresheafSpec load_model(const RunConfig& cfg, const GroundSet& ground) {
  const std::string text = !cfg.model.empty() && cfg.model.front() == '{' ? cfg.model : read_text_file(cfg.model);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("model config: ") + e.what());
  }
  ModelPresheafSpec spec = parse_model_config(j);
  if (spec.family == ModelFamily::Prototype) {
    if (cfg.labels.empty()) throw Error(ErrorCode::ParseError, "the prototype model needs --labels");
    spec.prototype.labels = read_labels_csv(cfg.labels, ground);
    if (cfg.seed) spec.prototype.seed = *cfg.seed;
  }
  return spec;
}

struct Loaded {
  Dataset data;
  Topology topology;
  ModelPresheafSpec spec;
  Assignment assignment;
};

Loaded load_inputs(const RunConfig& cfg) {
  Loaded in;
  in.data = read_data_csv(cfg.data);
  in.topology = generate_topology(in.data.ground, read_subbasis_json(cfg.subbasis), cfg.cap);
  in.spec = load_model(cfg, in.data.ground);
  if (cfg.assignment.empty()) {
    in.assignment = assignment_from_global(in.topology, in.data.global);
  } else {
    in.assignment = read_assignment_json(cfg.assignment, in.topology, in.data.global.dim());
  }
  return in;
}

void print_attribution(const Topology& t, const AttributionResult& result) {
  std::cout << "attribution (" << result.contributing.size() << " contributing open sets";
  if (!result.skipped.empty()) std::cout << ", " << result.skipped.size() << " skipped";
  std::cout << "):\n";
  for (const auto& [name, count] : ranked_attribution(t, result)) std::cout << "  " << name << " " << count << "\n";
}

int run_topology(const RunConfig& cfg) {
  auto subbasis = read_subbasis_json(cfg.subbasis);
  GroundSet ground = cfg.data.empty() ? ground_from_subbasis(subbasis) : read_data_csv(cfg.data).ground;
  const Topology t = generate_topology(ground, subbasis, cfg.cap);

  std::cout << t.size() << " open sets\n";
  std::cout << t.cover_edge_count() << " cover edges\n";
  std::cout << "longest chain " << t.height() << "\n";
  if (t.size() <= 256) {
    std::cout << "hasse diagram:\n";
    for (std::size_t u = t.size(); u-- > 0;) {
      std::cout << "  " << describe(t, u) << " ->";
      for (auto v : t.covers(u)) std::cout << " " << describe(t, v);
      std::cout << "\n";
    }
  }
  std::optional<IdealFiltration> filt;
  if (!cfg.open.empty()) {
    filt = filtration(t, parse_open_arg(t, cfg.open));
    std::cout << "filtration of " << describe(t, filt->root) << ":\n";
    for (std::size_t level = 0; level <= filt->max_level; ++level) {
      std::cout << "  level " << level << ":";
      for (std::size_t i = 0; i < filt->members.size(); ++i) {
        if (filt->levels[i] == level) std::cout << " " << describe(t, filt->members[i]);
      }
      std::cout << "\n";
    }
  }

  if (!cfg.out.empty()) {
    nlohmann::ordered_json j;
    j["count"] = t.size();
    j["cover_edges"] = t.cover_edge_count();
    nlohmann::ordered_json opens = nlohmann::ordered_json::array();
    for (std::size_t u = 0; u < t.size(); ++u) {
      nlohmann::ordered_json o;
      o["set"] = open_set_json(t, u);
      nlohmann::ordered_json covers = nlohmann::ordered_json::array();
      for (auto v : t.covers(u)) covers.push_back(open_set_json(t, v));
      o["covers"] = std::move(covers);
      opens.push_back(std::move(o));
    }
    j["opens"] = std::move(opens);
    if (filt) {
      nlohmann::ordered_json levels = nlohmann::ordered_json::array();
      for (std::size_t i = 0; i < filt->members.size(); ++i) {
        levels.push_back({{"set", open_set_json(t, filt->members[i])}, {"level", filt->levels[i]}});
      }
      j["filtration"] = {{"root", open_set_json(t, filt->root)}, {"levels", std::move(levels)}};
    }
    write_text_file(cfg.out, j.dump(2) + "\n");
  }
  return 0;
}

int run_analyze(const RunConfig& cfg) {
  const Loaded in = load_inputs(cfg);
  if (!cfg.assignment.empty()) {
    const auto c = is_consistent(in.topology, in.assignment, cfg.tol);
    std::cout << "assignment consistent: " << (c.consistent ? "yes" : "no");
    if (c.witness) {
      std::cout << " (" << describe(in.topology, c.witness->outer) << " vs " << describe(in.topology, c.witness->inner)
                << " at " << in.topology.ground().label(c.witness->element) << ": " << fmt(c.witness->outer_value)
                << " vs " << fmt(c.witness->inner_value) << ")";
    }
    std::cout << "\n";
  }

  AnalyzeOptions opts;
  opts.filter_levels = cfg.j_levels;
  opts.threads = cfg.threads;
  const InconsistencyReport report = analyze(in.topology, in.spec, in.assignment, opts);
  write_text_file(cfg.out, dump_report(in.topology, report));

  const Topology& t = in.topology;
  std::cout << "model " << in.spec.name() << ", " << t.size() << " open sets\n";
  if (report.global.at) {
    std::cout << "global inconsistency " << fmt(report.global.value) << " at " << describe(t, *report.global.at) << "\n";
  } else {
    std::cout << "global inconsistency undefined\n";
  }
  std::vector<const OpenReport*> ranked;
  for (const auto& r : report.opens) {
    if (r.local.defined) ranked.push_back(&r);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const OpenReport* a, const OpenReport* b) { return a->local.value > b->local.value; });
  std::cout << "top local inconsistencies:\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, ranked.size()); ++i) {
    const auto& r = *ranked[i];
    std::cout << "  " << describe(t, r.open) << " " << fmt(r.local.value);
    if (r.local.witness) std::cout << " (witness " << describe(t, *r.local.witness) << ")";
    std::cout << "\n";
  }
  std::size_t undefined = 0;
  for (const auto& r : report.opens) undefined += r.local.defined ? 0 : 1;
  if (undefined) std::cerr << undefined << " open sets have an undefined model\n";
  if (report.attribution) print_attribution(t, *report.attribution);
  std::cout << "report written to " << cfg.out << "\n";
  return 0;
}

int run_attribute(const RunConfig& cfg) {
  const Loaded in = load_inputs(cfg);
  const Topology& t = in.topology;
  ModelCache cache(t, in.spec, in.assignment);
  const AttributionResult result = attribution_tally(cache, cfg.threads);
  const auto ranked = ranked_attribution(t, result);

  nlohmann::ordered_json j;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [name, count] : ranked) counts[name] = count;
  j["attribution"] = std::move(counts);
  j["contributing"] = result.contributing.size();
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (auto u : result.skipped) skipped.push_back(open_set_json(t, u));
  j["skipped"] = std::move(skipped);
  write_text_file(cfg.out, j.dump(2) + "\n");

  std::string csv = "name,count\n";
  for (const auto& [name, count] : ranked) csv += name + "," + std::to_string(count) + "\n";
  const fs::path csv_path = cfg.csv.empty() ? fs::path(cfg.out).replace_extension(".csv") : fs::path(cfg.csv);
  write_text_file(csv_path, csv);

  print_attribution(t, result);
  std::cout << "tally written to " << cfg.out << " and " << csv_path.string() << "\n";
  return 0;
}

int run_synth(const SynthSpec& spec, const std::string& out_dir) {
  const SynthData data = generate_synthetic(spec);
  const fs::path dir(out_dir);
  write_text_file(dir / "data.csv", data_csv(data));
  write_text_file(dir / "labels.csv", labels_csv(data));
  write_text_file(dir / "subbasis.json", subbasis_json(data));
  std::cout << data.ids.size() << " elements in " << spec.parts << " parts, dimension " << spec.dim << "\n";
  if (spec.defect_part) std::cout << "defect planted in part" << *spec.defect_part << "\n";
  std::cout << "wrote " << (dir / "data.csv").string() << ", " << (dir / "labels.csv").string() << ", "
            << (dir / "subbasis.json").string() << "\n";
  return 0;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SubbasisOutOfRange: return 2;
    case ErrorCode::CapExceeded: return 3;
    case ErrorCode::NotDisjointCover: return 4;
    default: return 1;
  }
}

void add_input_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--data", cfg.data, "Data CSV (id,v1,...,vr)")->required();
  cmd->add_option("--subbasis", cfg.subbasis, "Subbasis JSON (name -> labels)")->required();
  cmd->add_option("--labels", cfg.labels, "Labels CSV (id,label) for the prototype model");
  cmd->add_option("--model", cfg.model, "Model config JSON file or inline JSON");
  cmd->add_option("--assignment", cfg.assignment, "Assignment JSON replacing the data-induced one");
  cmd->add_option("--cap", cfg.cap, "Maximum number of open sets")->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  cmd->add_option("--tol", cfg.tol, "Consistency tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", cfg.seed, "Seed for the prototype episodes");
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = auto)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-fit inconsistency across subpopulations"};
  app.require_subcommand(1);

  RunConfig cfg;
  SynthSpec synth;
  std::optional<std::size_t> defect;
  std::string synth_out = ".";

  auto* topo = app.add_subcommand("topology", "Generate the topology of a subbasis and print its structure");
  topo->add_option("--data", cfg.data, "Data CSV providing the ground set");
  topo->add_option("--subbasis", cfg.subbasis, "Subbasis JSON")->required();
  topo->add_option("--cap", cfg.cap, "Maximum number of open sets")->check(CLI::Range(std::size_t{2}, SIZE_MAX));
  topo->add_option("--open", cfg.open, "Open set for the filtration: subbasis name or comma-separated labels");
  topo->add_option("--out", cfg.out, "Write the topology as JSON");

  auto* analyze_cmd = app.add_subcommand("analyze", "Compute local, filtered and global inconsistency");
  add_input_options(analyze_cmd, cfg);
  analyze_cmd->add_option("--j", cfg.j_levels, "Filtration levels for filtered inconsistency");
  analyze_cmd->add_option("--out", cfg.out, "Report JSON path")->required();

  auto* attribute_cmd = app.add_subcommand("attribute", "Tally which part's removal drives the largest gap");
  add_input_options(attribute_cmd, cfg);
  attribute_cmd->add_option("--out", cfg.out, "Attribution JSON path")->required();
  attribute_cmd->add_option("--csv", cfg.csv, "Plot-ready CSV (default: --out with .csv extension)");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic clustered dataset with optional label defect");
  synth_cmd->add_option("--parts", synth.parts, "Number of parts")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--per-part", synth.per_part, "Elements per part");
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension");
  synth_cmd->add_option("--separation", synth.separation, "Distance between class means");
  synth_cmd->add_option("--defect", defect, "Index of the part whose labels are shuffled");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*topo) return run_topology(cfg);
    if (*analyze_cmd) return run_analyze(cfg);
    if (*attribute_cmd) return run_attribute(cfg);
    if (*synth_cmd) {
      synth.defect_part = defect;
      try {
        return run_synth(synth, synth_out);
      } catch (const Error& e) {
        std::cerr << "error: invalid synth spec: " << e.what() << "\n";
        return 2;
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
