#pragma once

// Static semantic checks over a Schema. `validate` is a pure function: the
// diagnostic list is the output, never an exception, and identical schemas
// yield identical lists. Rules:
//
//   V-EXCL    each stage kind at most once per machine
//   V-RECEP   receive excludes arrive/accept within one machine
//   V-FLOW    intra-machine arcs follow the stage adjacency table; flow
//             endpoints resolve; storage links are well-formed
//   V-XBOUND  cross-machine arcs connect transfer -> transfer/receive/arrive
//   V-TRIG    trigger endpoints resolve; warning when the target kind is not
//             create/receive/arrive
//   V-REGION  event regions are nonempty, resolvable and closed; warning
//             when a region's stages are not weakly connected
//   V-TRACE   event names are unique; declared traces reference defined
//             events
//   V-SPHERE  sphere/machine names are unique per nesting level
//
// The intra-machine adjacency table (storage links are exempt from it):
//   arrive -> accept
//   accept | receive | create -> process | release
//   process -> release
//   release -> transfer
//   transfer -> receive | arrive

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fm/core.hpp"
#include "fm/dsl.hpp"

namespace fm {

struct ValidationDiagnostic {
  Severity severity = Severity::Error;
  std::string rule;
  std::string message;
  std::string subject;  // path of the offending element

  bool operator==(const ValidationDiagnostic&) const = default;
};

inline bool intra_flow_allowed(StageKind from, StageKind to) {
  switch (from) {
    case StageKind::Arrive:
      return to == StageKind::Accept;
    case StageKind::Accept:
    case StageKind::Receive:
    case StageKind::Create:
      return to == StageKind::Process || to == StageKind::Release;
    case StageKind::Process:
      return to == StageKind::Release;
    case StageKind::Release:
      return to == StageKind::Transfer;
    case StageKind::Transfer:
      return to == StageKind::Receive || to == StageKind::Arrive;
  }
  return false;
}

// Applies V-FLOW / V-XBOUND to a single arc. Used by validate and by
// interactive tooling, so unresolvable endpoints come back as a diagnostic
// rather than an exception.
inline std::optional<ValidationDiagnostic> check_flow_arc(const FlowArc& arc,
                                                          const Schema& schema) {
  const std::string subject = arc.source.path() + " -> " + arc.target.path();
  if (!stage_exists(schema, arc.source) || !stage_exists(schema, arc.target)) {
    return ValidationDiagnostic{Severity::Error, "V-FLOW",
                                "flow endpoint does not resolve", subject};
  }
  if (arc.source == arc.target) {
    return ValidationDiagnostic{Severity::Error, "V-FLOW",
                                "flow source and target coincide", subject};
  }
  const bool same_machine = arc.source.sphere_path == arc.target.sphere_path &&
                            arc.source.machine == arc.target.machine;
  if (same_machine) {
    if (!intra_flow_allowed(arc.source.stage, arc.target.stage)) {
      return ValidationDiagnostic{
          Severity::Error, "V-FLOW",
          std::string("illegal stage transition ") + to_string(arc.source.stage) +
              " -> " + to_string(arc.target.stage) +
              " (use a trigger for non-flow causation)",
          subject};
    }
    return std::nullopt;
  }
  const bool legal = arc.source.stage == StageKind::Transfer &&
                     (arc.target.stage == StageKind::Transfer ||
                      arc.target.stage == StageKind::Receive ||
                      arc.target.stage == StageKind::Arrive);
  if (!legal) {
    return ValidationDiagnostic{
        Severity::Error, "V-XBOUND",
        "cross-machine flows connect transfer -> transfer/receive/arrive only",
        subject};
  }
  return std::nullopt;
}

namespace validate_detail {

struct Walker {
  const Schema& schema;
  std::vector<ValidationDiagnostic>& out;

  void report(Severity severity, std::string rule, std::string message,
              std::string subject) {
    out.push_back({severity, std::move(rule), std::move(message),
                   std::move(subject)});
  }

  void check_level(const std::vector<Sphere>& spheres,
                   const std::vector<Machine>* machines,
                   const std::string& level_path) {
    std::set<std::string> seen;
    for (const Sphere& sphere : spheres) {
      if (!seen.insert(sphere.name).second) {
        report(Severity::Error, "V-SPHERE",
               "duplicate name '" + sphere.name + "' at this nesting level",
               level_path.empty() ? sphere.name : level_path + "." + sphere.name);
      }
    }
    if (machines != nullptr) {
      for (const Machine& machine : *machines) {
        if (!seen.insert(machine.thing_name).second) {
          report(Severity::Error, "V-SPHERE",
                 "duplicate name '" + machine.thing_name +
                     "' at this nesting level",
                 level_path + "." + machine.thing_name);
        }
      }
    }
  }

  void check_machine(const Machine& machine, const std::string& path) {
    std::set<StageKind> seen;
    for (StageKind kind : machine.stages) {
      if (!seen.insert(kind).second) {
        report(Severity::Error, "V-EXCL",
               std::string("stage '") + to_string(kind) +
                   "' declared more than once",
               path);
      }
    }
    if (machine.has_stage(StageKind::Receive) &&
        (machine.has_stage(StageKind::Arrive) ||
         machine.has_stage(StageKind::Accept))) {
      report(Severity::Error, "V-RECEP",
             "receive excludes arrive/accept; reception is combined or split, "
             "never both",
             path);
    }
    if (!machine.storage_links.empty() && !machine.has_storage) {
      report(Severity::Error, "V-FLOW",
             "storage links declared but the machine has no storage", path);
    }
    std::set<StageKind> links;
    for (StageKind kind : machine.storage_links) {
      if (!links.insert(kind).second) {
        report(Severity::Error, "V-FLOW",
               std::string("duplicate storage link for stage '") +
                   to_string(kind) + "'",
               path);
      }
      if (!machine.has_stage(kind)) {
        report(Severity::Error, "V-FLOW",
               std::string("storage link references undeclared stage '") +
                   to_string(kind) + "'",
               path);
      }
    }
  }

  void walk(const Sphere& sphere, const std::string& path) {
    check_level(sphere.subspheres, &sphere.machines, path);
    for (const Machine& machine : sphere.machines) {
      check_machine(machine, path + "." + machine.thing_name);
    }
    for (const Sphere& sub : sphere.subspheres) {
      walk(sub, path + "." + sub.name);
    }
  }

  // Weak connectivity of a region's stages through region flows plus any
  // trigger whose endpoints lie in the region.
  bool region_connected(const Region& region) {
    if (region.stages.size() <= 1) return true;
    std::map<StageRef, int> index;
    int next = 0;
    for (const StageRef& stage : region.stages) index[stage] = next++;
    std::vector<int> parent(static_cast<std::size_t>(next));
    for (int i = 0; i < next; ++i) parent[static_cast<std::size_t>(i)] = i;
    auto find = [&](int a) {
      while (parent[static_cast<std::size_t>(a)] != a) {
        a = parent[static_cast<std::size_t>(a)] =
            parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      }
      return a;
    };
    auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
    for (int flow_index : region.flows) {
      if (flow_index < 0 ||
          flow_index >= static_cast<int>(schema.flows.size())) {
        continue;
      }
      const FlowArc& arc = schema.flows[static_cast<std::size_t>(flow_index)];
      auto a = index.find(arc.source);
      auto b = index.find(arc.target);
      if (a != index.end() && b != index.end()) unite(a->second, b->second);
    }
    for (const TriggerArc& trigger : schema.triggers) {
      auto target = index.find(trigger.target);
      if (target == index.end()) continue;
      if (const auto* stage = std::get_if<StageRef>(&trigger.source)) {
        auto source = index.find(*stage);
        if (source != index.end()) unite(source->second, target->second);
      } else {
        const int flow_index = std::get<int>(trigger.source);
        if (flow_index < 0 ||
            flow_index >= static_cast<int>(schema.flows.size())) {
          continue;
        }
        const FlowArc& arc = schema.flows[static_cast<std::size_t>(flow_index)];
        auto a = index.find(arc.source);
        auto b = index.find(arc.target);
        if (a != index.end()) unite(a->second, target->second);
        if (b != index.end()) unite(b->second, target->second);
      }
    }
    const int root = find(0);
    for (int i = 1; i < next; ++i) {
      if (find(i) != root) return false;
    }
    return true;
  }
};

}  // namespace validate_detail

inline std::vector<ValidationDiagnostic> validate(const Schema& schema) {
  std::vector<ValidationDiagnostic> out;
  validate_detail::Walker walker{schema, out};

  walker.check_level(schema.spheres, nullptr, "");
  for (const Sphere& root : schema.spheres) walker.walk(root, root.name);

  for (const FlowArc& arc : schema.flows) {
    if (auto diagnostic = check_flow_arc(arc, schema)) {
      out.push_back(std::move(*diagnostic));
    }
  }

  for (const TriggerArc& trigger : schema.triggers) {
    const std::string subject = "trigger ~> " + trigger.target.path();
    if (const auto* stage = std::get_if<StageRef>(&trigger.source)) {
      if (!stage_exists(schema, *stage)) {
        walker.report(Severity::Error, "V-TRIG",
                      "trigger source does not resolve", stage->path());
      }
    } else {
      const int flow_index = std::get<int>(trigger.source);
      if (flow_index < 0 || flow_index >= static_cast<int>(schema.flows.size())) {
        walker.report(Severity::Error, "V-TRIG",
                      "trigger source names a flow arc that is not declared",
                      subject);
      }
    }
    if (!stage_exists(schema, trigger.target)) {
      walker.report(Severity::Error, "V-TRIG", "trigger target does not resolve",
                    trigger.target.path());
    } else if (trigger.target.stage != StageKind::Create &&
               trigger.target.stage != StageKind::Receive &&
               trigger.target.stage != StageKind::Arrive) {
      walker.report(Severity::Warning, "V-TRIG",
                    std::string("trigger target kind '") +
                        to_string(trigger.target.stage) +
                        "' rarely starts a flow (expected create, receive or "
                        "arrive)",
                    trigger.target.path());
    }
  }

  std::set<std::string> event_names;
  for (const EventDef& event : schema.events) {
    if (!event_names.insert(event.name).second) {
      walker.report(Severity::Error, "V-TRACE",
                    "duplicate event name '" + event.name + "'", event.name);
    }
    if (event.region.empty()) {
      walker.report(Severity::Error, "V-REGION", "event region is empty",
                    event.name);
      continue;
    }
    bool resolvable = true;
    for (const StageRef& stage : event.region.stages) {
      if (!stage_exists(schema, stage)) {
        walker.report(Severity::Error, "V-REGION",
                      "region stage '" + stage.path() + "' does not resolve",
                      event.name);
        resolvable = false;
      }
    }
    for (int flow_index : event.region.flows) {
      if (flow_index < 0 || flow_index >= static_cast<int>(schema.flows.size())) {
        walker.report(Severity::Error, "V-REGION",
                      "region references a flow arc that is not declared",
                      event.name);
        resolvable = false;
      }
    }
    if (!resolvable) continue;
    if (region_closure(schema, event.region) != event.region) {
      walker.report(Severity::Error, "V-REGION",
                    "region is not closed (missing induced flow arcs)",
                    event.name);
    } else if (!walker.region_connected(event.region)) {
      walker.report(Severity::Warning, "V-REGION",
                    "region stages are not weakly connected via flows or "
                    "triggers",
                    event.name);
    }
  }

  for (const DeclaredTrace& trace : schema.declared_traces) {
    for (const std::string& event_name : trace.events) {
      if (schema.find_event(event_name) == nullptr) {
        walker.report(Severity::Error, "V-TRACE",
                      "trace '" + trace.name + "' references undefined event '" +
                          event_name + "'",
                      trace.name);
      }
    }
  }

  return out;
}

inline bool has_errors(const std::vector<ValidationDiagnostic>& diagnostics) {
  for (const ValidationDiagnostic& diagnostic : diagnostics) {
    if (diagnostic.severity == Severity::Error) return true;
  }
  return false;
}

}  // namespace fm
