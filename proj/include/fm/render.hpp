#pragma once

// Deterministic serialization: DOT diagrams of schemas (spheres and machines
// as nested clusters, stages as nodes, flows solid, triggers dashed, storage
// dotted with a box3d node), machine-readable trace documents (JSON with
// stable key order), and a plain-text timeline. All three are pure functions
// with byte-stable output, LF endings.
//
// Trace documents round-trip exactly: parse(to_text(doc)) re-serializes to
// identical bytes. A rebuilt Trace keeps the document's row order within
// each group (rows are sorted by (start, name)); simulator-built traces use
// event declaration order instead, so compare traces of one provenance.

#include <algorithm>
#include <cctype>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fm/core.hpp"
#include "fm/event_algebra.hpp"
#include "fm/simulate.hpp"

namespace fm {

struct DotDocument {
  std::string text;
};

namespace render_detail {

inline std::string dot_id(std::string text) {
  for (char& c : text) {
    if (c == '.') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return text;
}

inline std::string node_id(const StageRef& stage) {
  return dot_id(stage.sphere_path + "." + stage.machine + "." +
                to_string(stage.stage));
}

inline constexpr const char* kOverlayFills[] = {
    "lightblue", "lightyellow", "lightpink",  "lightgreen",
    "lavender",  "mistyrose",   "aquamarine", "thistle",
};

struct DotWriter {
  const Schema& schema;
  std::span<const EventDef> overlays;
  std::string out;
  std::map<StageRef, std::string> fills;

  void indent(int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

  void write_machine(const Machine& machine, const std::string& sphere_path,
                     int depth) {
    const std::string machine_path = sphere_path + "." + machine.thing_name;
    indent(depth);
    out += "subgraph cluster_" + dot_id(machine_path) + " {\n";
    indent(depth + 1);
    out += "label=\"" + machine.thing_name + "\";\n";
    for (StageKind kind : machine.stages) {
      const StageRef stage{sphere_path, machine.thing_name, kind};
      indent(depth + 1);
      out += node_id(stage) + " [label=\"" + to_string(kind) + "\"";
      const auto fill = fills.find(stage);
      if (fill != fills.end()) {
        out += ", style=filled, fillcolor=" + fill->second;
      }
      out += "];\n";
    }
    if (machine.has_storage) {
      indent(depth + 1);
      out += dot_id(machine_path) + "_storage [label=\"storage\", shape=box3d];\n";
    }
    indent(depth);
    out += "}\n";
  }

  void write_sphere(const Sphere& sphere, const std::string& parent_path,
                    int depth) {
    const std::string path =
        parent_path.empty() ? sphere.name : parent_path + "." + sphere.name;
    indent(depth);
    out += "subgraph cluster_" + dot_id(path) + " {\n";
    indent(depth + 1);
    out += "label=\"" + sphere.name + "\";\n";
    for (const Machine& machine : sphere.machines) {
      write_machine(machine, path, depth + 1);
    }
    for (const Sphere& sub : sphere.subspheres) {
      write_sphere(sub, path, depth + 1);
    }
    indent(depth);
    out += "}\n";
  }

  void write_storage_edges(const Sphere& sphere, const std::string& parent_path) {
    const std::string path =
        parent_path.empty() ? sphere.name : parent_path + "." + sphere.name;
    for (const Machine& machine : sphere.machines) {
      const std::string machine_path = path + "." + machine.thing_name;
      for (StageKind kind : machine.storage_links) {
        out += "  " + node_id(StageRef{path, machine.thing_name, kind}) +
               " -> " + dot_id(machine_path) +
               "_storage [style=dotted, dir=both];\n";
      }
    }
    for (const Sphere& sub : sphere.subspheres) write_storage_edges(sub, path);
  }

  std::string run() {
    if (schema.spheres.empty() && schema.flows.empty() &&
        schema.triggers.empty()) {
      return "digraph fm {\n}\n";
    }
    for (std::size_t i = 0; i < overlays.size(); ++i) {
      const char* fill = kOverlayFills[i % std::size(kOverlayFills)];
      for (const StageRef& stage : overlays[i].region.stages) {
        fills.emplace(stage, fill);  // first overlay containing a node wins
      }
    }
    out += "digraph fm {\n";
    out += "  graph [rankdir=LR, compound=true];\n";
    out += "  node [shape=box];\n";
    for (const Sphere& root : schema.spheres) write_sphere(root, "", 1);
    for (const FlowArc& arc : schema.flows) {
      out += "  " + node_id(arc.source) + " -> " + node_id(arc.target) + ";\n";
    }
    for (const TriggerArc& trigger : schema.triggers) {
      std::string source_id;
      if (const auto* stage = std::get_if<StageRef>(&trigger.source)) {
        source_id = node_id(*stage);
      } else {
        const int index = std::get<int>(trigger.source);
        if (index < 0 || index >= static_cast<int>(schema.flows.size())) continue;
        // Arc-sourced trigger: draw from the arc's source stage.
        source_id = node_id(schema.flows[static_cast<std::size_t>(index)].source);
      }
      out += "  " + source_id + " -> " + node_id(trigger.target) +
             " [style=dashed];\n";
    }
    for (const Sphere& root : schema.spheres) write_storage_edges(root, "");
    if (!overlays.empty()) {
      out += "  subgraph cluster_legend {\n";
      out += "    label=\"events\";\n";
      for (std::size_t i = 0; i < overlays.size(); ++i) {
        const char* fill = kOverlayFills[i % std::size(kOverlayFills)];
        std::string label = overlays[i].name;
        if (!overlays[i].label.empty()) label += ": " + overlays[i].label;
        std::string escaped;
        for (char c : label) {
          if (c == '"' || c == '\\') escaped += '\\';
          escaped += c;
        }
        out += "    legend_" + dot_id(overlays[i].name) + " [label=\"" +
               escaped + "\", style=filled, fillcolor=" + fill + "];\n";
      }
      out += "  }\n";
    }
    out += "}\n";
    return out;
  }
};

}  // namespace render_detail

// Spheres render as nested clusters, machines as inner clusters, stages as
// nodes, flows as solid edges, triggers as dashed edges. Each overlay event
// fills its region's nodes and adds a legend entry.
inline DotDocument to_dot(const Schema& schema,
                          std::span<const EventDef> overlays = {}) {
  render_detail::DotWriter writer{schema, overlays, {}, {}};
  return DotDocument{writer.run()};
}

struct TraceDocumentRow {
  std::string name;
  int start = 0;
  int end = 0;
  std::vector<Gap> gaps;
  int group = 0;

  bool operator==(const TraceDocumentRow&) const = default;
};

struct TraceDocument {
  std::string schema_name;
  std::string scenario_name;
  std::string terminated = "quiescence";
  std::vector<TraceDocumentRow> events;  // sorted by (start, name)

  bool operator==(const TraceDocument&) const = default;
};

inline TraceDocument trace_to_document(const SimResult& result) {
  TraceDocument document;
  document.schema_name = result.schema_name;
  document.scenario_name = result.scenario_name;
  document.terminated = to_string(result.terminated);
  for (std::size_t g = 0; g < result.trace.groups.size(); ++g) {
    for (const EventInstance& instance : result.trace.groups[g]) {
      document.events.push_back(TraceDocumentRow{instance.event, instance.start,
                                                 instance.end, instance.gaps,
                                                 static_cast<int>(g)});
    }
  }
  std::stable_sort(document.events.begin(), document.events.end(),
                   [](const TraceDocumentRow& a, const TraceDocumentRow& b) {
                     return std::tuple(a.start, a.name, a.end, a.gaps) <
                            std::tuple(b.start, b.name, b.end, b.gaps);
                   });
  return document;
}

inline std::string to_text(const TraceDocument& document) {
  nlohmann::ordered_json root;
  root["meta"] = {
      {"schema", document.schema_name},
      {"scenario", document.scenario_name},
      {"terminated", document.terminated},
  };
  root["events"] = nlohmann::ordered_json::array();
  for (const TraceDocumentRow& row : document.events) {
    nlohmann::ordered_json entry;
    entry["name"] = row.name;
    entry["start"] = row.start;
    entry["end"] = row.end;
    entry["gaps"] = nlohmann::ordered_json::array();
    for (const Gap& gap : row.gaps) {
      entry["gaps"].push_back({gap.from, gap.to});
    }
    entry["group"] = row.group;
    root["events"].push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

inline std::optional<TraceDocument> parse_trace_document(std::string_view text,
                                                         std::string* error) {
  const auto root =
      nlohmann::json::parse(text, /*cb=*/nullptr, /*allow_exceptions=*/false);
  auto fail = [&](const std::string& message) -> std::optional<TraceDocument> {
    if (error != nullptr) *error = message;
    return std::nullopt;
  };
  if (root.is_discarded() || !root.is_object()) {
    return fail("not a trace document (invalid JSON)");
  }
  if (!root.contains("meta") || !root["meta"].is_object() ||
      !root.contains("events") || !root["events"].is_array()) {
    return fail("not a trace document (missing meta/events)");
  }
  TraceDocument document;
  const auto& meta = root["meta"];
  auto meta_string = [&](const char* key) -> std::string {
    return meta.contains(key) && meta[key].is_string()
               ? meta[key].get<std::string>()
               : std::string();
  };
  document.schema_name = meta_string("schema");
  document.scenario_name = meta_string("scenario");
  document.terminated = meta_string("terminated");
  for (const auto& entry : root["events"]) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry["name"].is_string() || !entry.contains("start") ||
        !entry["start"].is_number_integer() || !entry.contains("end") ||
        !entry["end"].is_number_integer() || !entry.contains("group") ||
        !entry["group"].is_number_integer()) {
      return fail("malformed trace event entry");
    }
    TraceDocumentRow row;
    row.name = entry["name"].get<std::string>();
    row.start = entry["start"].get<int>();
    row.end = entry["end"].get<int>();
    row.group = entry["group"].get<int>();
    if (entry.contains("gaps")) {
      if (!entry["gaps"].is_array()) return fail("malformed gaps");
      for (const auto& gap : entry["gaps"]) {
        if (!gap.is_array() || gap.size() != 2 ||
            !gap[0].is_number_integer() || !gap[1].is_number_integer()) {
          return fail("malformed gaps");
        }
        row.gaps.push_back(Gap{gap[0].get<int>(), gap[1].get<int>()});
      }
    }
    document.events.push_back(std::move(row));
  }
  return document;
}

// Rebuilds a Trace from a document; rows keep document order within groups.
inline Trace to_trace(const TraceDocument& document) {
  std::map<int, std::vector<EventInstance>> by_group;
  for (const TraceDocumentRow& row : document.events) {
    by_group[row.group].push_back(
        EventInstance{row.name, row.start, row.end, row.gaps});
  }
  Trace trace;
  for (auto& [group, instances] : by_group) {
    trace.groups.push_back(std::move(instances));
  }
  return trace;
}

// One row per instance: start, end, name, shared group marker, gaps as an
// annotation. Rows sorted by (start, name).
inline std::string timeline(const SimResult& result) {
  struct Row {
    int start;
    int end;
    std::string name;
    int group;
    std::vector<Gap> gaps;
  };
  std::vector<Row> rows;
  for (std::size_t g = 0; g < result.trace.groups.size(); ++g) {
    for (const EventInstance& instance : result.trace.groups[g]) {
      rows.push_back(Row{instance.start, instance.end, instance.event,
                         static_cast<int>(g), instance.gaps});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tuple(a.start, a.name, a.end) < std::tuple(b.start, b.name, b.end);
  });
  std::string out;
  for (const Row& row : rows) {
    std::string start = std::to_string(row.start);
    std::string end = std::to_string(row.end);
    out += std::string(start.size() < 5 ? 5 - start.size() : 0, ' ') + start;
    out += std::string(end.size() < 6 ? 6 - end.size() : 0, ' ') + end;
    out += "  " + row.name;
    if (row.name.size() < 24) out += std::string(24 - row.name.size(), ' ');
    out += " g" + std::to_string(row.group);
    if (!row.gaps.empty()) {
      out += "  gaps=";
      for (const Gap& gap : row.gaps) {
        out += "[" + std::to_string(gap.from) + "," + std::to_string(gap.to) + ")";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace fm
