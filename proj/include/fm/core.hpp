#pragma once

// In-memory model of a flow-machine schema: a typed, addressable graph of
// spheres, machines and stages connected by flow arcs (solid) and trigger
// arcs (dashed), plus event definitions over regions of that graph.
//
// Everything here is a plain value type. A schema produced by the parser
// satisfies the construction invariants (unique names per nesting level,
// well-formed stage sets, resolvable arc endpoints); hand-built schemas may
// violate them, which is what the validator is for. Once constructed a
// schema is treated as immutable and may be read from any number of threads.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fm {

// The seven mutually exclusive stages of a flow machine. Storage is not a
// stage kind; it is a per-machine attachment (see Machine::storage_links).
enum class StageKind {
  Create,
  Release,
  Transfer,
  Receive,
  Arrive,
  Accept,
  Process,
};

inline constexpr StageKind kAllStageKinds[] = {
    StageKind::Create,  StageKind::Release, StageKind::Transfer,
    StageKind::Receive, StageKind::Arrive,  StageKind::Accept,
    StageKind::Process,
};

inline const char* to_string(StageKind kind) {
  switch (kind) {
    case StageKind::Create: return "create";
    case StageKind::Release: return "release";
    case StageKind::Transfer: return "transfer";
    case StageKind::Receive: return "receive";
    case StageKind::Arrive: return "arrive";
    case StageKind::Accept: return "accept";
    case StageKind::Process: return "process";
  }
  return "?";
}

inline std::optional<StageKind> stage_kind_from(std::string_view name) {
  for (StageKind kind : kAllStageKinds) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

// One machine handles exactly one kind of thing. `stages` keeps declaration
// order; a well-formed machine declares each kind at most once and never
// mixes Receive with Arrive/Accept (reception is combined or split, not
// both).
struct Machine {
  std::string thing_name;
  std::vector<StageKind> stages;
  bool has_storage = false;
  std::vector<StageKind> storage_links;  // stage <-> storage attachments

  bool has_stage(StageKind kind) const {
    return std::find(stages.begin(), stages.end(), kind) != stages.end();
  }
};

// A named environment holding machines and subspheres. Machines are leaves:
// they never contain spheres or other machines.
struct Sphere {
  std::string name;
  std::vector<Sphere> subspheres;
  std::vector<Machine> machines;
};

struct SphereRef {
  std::string path;  // dotted path from a root sphere
  auto operator<=>(const SphereRef&) const = default;
};

struct MachineRef {
  std::string sphere_path;
  std::string machine;
  auto operator<=>(const MachineRef&) const = default;

  std::string path() const { return sphere_path + "." + machine; }
};

// Stage identity is (sphere_path, machine, kind); stages carry no names of
// their own and kinds are unique within a machine, so the triple suffices.
struct StageRef {
  std::string sphere_path;
  std::string machine;
  StageKind stage = StageKind::Create;
  auto operator<=>(const StageRef&) const = default;

  std::string path() const {
    return sphere_path + "." + machine + "." + to_string(stage);
  }
};

using Ref = std::variant<SphereRef, MachineRef, StageRef>;

inline std::string path_of(const Ref& ref) {
  if (const auto* s = std::get_if<SphereRef>(&ref)) return s->path;
  if (const auto* m = std::get_if<MachineRef>(&ref)) return m->path();
  return std::get<StageRef>(ref).path();
}

// Solid arrow: a thing moves from one stage to another.
struct FlowArc {
  StageRef source;
  StageRef target;
  int declaration_index = 0;

  bool operator==(const FlowArc&) const = default;
};

// Dashed arrow: activity at the source (a stage, or a flow arc referenced by
// its index into Schema::flows) causes activity at the target stage. No
// thing travels along a trigger.
using TriggerSource = std::variant<StageRef, int>;

struct TriggerArc {
  TriggerSource source;
  StageRef target;
  int declaration_index = 0;

  bool operator==(const TriggerArc&) const = default;
};

// A closed diagram fragment: a stage set plus every flow arc whose both
// endpoints lie in it. Arc identity is the index into Schema::flows.
struct Region {
  std::set<StageRef> stages;
  std::set<int> flows;

  bool empty() const { return stages.empty(); }

  bool contains(const Region& other) const {
    return std::includes(stages.begin(), stages.end(), other.stages.begin(),
                         other.stages.end()) &&
           std::includes(flows.begin(), flows.end(), other.flows.begin(),
                         other.flows.end());
  }

  bool operator==(const Region&) const = default;
};

// An event is a thing with its own (implicit) machine that realizes a region
// of the static schema in time. `duration` is the tick span of instances the
// time machine creates; `property_labels` names property machines riding
// along (e.g. slowness). `schema_tag` identifies the schema the region was
// closed against so that cross-schema comparisons can be rejected.
struct EventDef {
  std::string name;
  std::string label;
  Region region;
  int duration = 1;
  std::set<std::string> property_labels;
  std::uint64_t schema_tag = 0;

  bool operator==(const EventDef&) const = default;
};

struct DeclaredTrace {
  std::string name;
  std::vector<std::string> events;

  bool operator==(const DeclaredTrace&) const = default;
};

struct Schema {
  std::string name;  // set by loaders from the file stem; not part of the text
  std::vector<Sphere> spheres;
  std::vector<FlowArc> flows;
  std::vector<TriggerArc> triggers;
  std::vector<EventDef> events;
  std::vector<DeclaredTrace> declared_traces;

  const EventDef* find_event(std::string_view event_name) const {
    for (const EventDef& e : events) {
      if (e.name == event_name) return &e;
    }
    return nullptr;
  }
};

namespace detail {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

inline std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> segments;
  std::size_t begin = 0;
  while (begin <= path.size()) {
    std::size_t dot = path.find('.', begin);
    if (dot == std::string_view::npos) dot = path.size();
    if (dot == begin) return {};  // empty segment: malformed
    segments.emplace_back(path.substr(begin, dot - begin));
    begin = dot + 1;
    if (begin == path.size() + 1) break;
  }
  return segments;
}

inline void collect_matches(const Sphere& sphere, std::span<const std::string> rest,
                            const std::string& sphere_path, std::vector<Ref>& out) {
  if (rest.empty()) {
    out.push_back(SphereRef{sphere_path});
    return;
  }
  for (const Sphere& sub : sphere.subspheres) {
    if (sub.name == rest[0]) {
      collect_matches(sub, rest.subspan(1), sphere_path + "." + sub.name, out);
    }
  }
  for (const Machine& machine : sphere.machines) {
    if (machine.thing_name != rest[0]) continue;
    if (rest.size() == 1) {
      out.push_back(MachineRef{sphere_path, machine.thing_name});
    } else if (rest.size() == 2) {
      if (auto kind = stage_kind_from(rest[1]); kind && machine.has_stage(*kind)) {
        out.push_back(StageRef{sphere_path, machine.thing_name, *kind});
      }
    }
  }
}

}  // namespace detail

// Resolves a dotted path to the unique schema element it names: spheres
// first, then a machine segment, then a stage-kind segment. Returns nullopt
// when nothing matches. More than one match means the schema violates the
// per-level name uniqueness invariant; that is an internal error here (the
// validator reports it as V-SPHERE).
inline std::optional<Ref> resolve(const Schema& schema, std::string_view path) {
  const std::vector<std::string> segments = detail::split_path(path);
  if (segments.empty()) return std::nullopt;
  std::vector<Ref> matches;
  for (const Sphere& root : schema.spheres) {
    if (root.name == segments[0]) {
      detail::collect_matches(root, std::span(segments).subspan(1), root.name,
                              matches);
    }
  }
  std::sort(matches.begin(), matches.end());
  matches.erase(std::unique(matches.begin(), matches.end()), matches.end());
  if (matches.empty()) return std::nullopt;
  if (matches.size() > 1) {
    throw std::logic_error("ambiguous path: " + std::string(path));
  }
  return matches.front();
}

inline const Sphere* find_sphere(const Schema& schema, std::string_view dotted) {
  const std::vector<std::string> segments = detail::split_path(dotted);
  if (segments.empty()) return nullptr;
  const std::vector<Sphere>* level = &schema.spheres;
  const Sphere* current = nullptr;
  for (const std::string& segment : segments) {
    current = nullptr;
    for (const Sphere& sphere : *level) {
      if (sphere.name == segment) {
        current = &sphere;
        break;
      }
    }
    if (current == nullptr) return nullptr;
    level = &current->subspheres;
  }
  return current;
}

inline const Machine* find_machine(const Schema& schema,
                                   std::string_view sphere_path,
                                   std::string_view thing_name) {
  const Sphere* sphere = find_sphere(schema, sphere_path);
  if (sphere == nullptr) return nullptr;
  for (const Machine& machine : sphere->machines) {
    if (machine.thing_name == thing_name) return &machine;
  }
  return nullptr;
}

inline bool stage_exists(const Schema& schema, const StageRef& ref) {
  const Machine* machine = find_machine(schema, ref.sphere_path, ref.machine);
  return machine != nullptr && machine->has_stage(ref.stage);
}

// All flow arcs leaving `at`, ordered by declaration index. That order is
// the simulator's tie-break, so it is part of the semantics.
inline std::vector<FlowArc> outgoing(const Schema& schema, const StageRef& at) {
  if (!stage_exists(schema, at)) {
    throw std::invalid_argument("no such stage: " + at.path());
  }
  std::vector<FlowArc> arcs;
  for (const FlowArc& arc : schema.flows) {
    if (arc.source == at) arcs.push_back(arc);
  }
  std::sort(arcs.begin(), arcs.end(), [](const FlowArc& a, const FlowArc& b) {
    return a.declaration_index < b.declaration_index;
  });
  return arcs;
}

namespace detail {

inline void add_sphere_stages(const Sphere& sphere, const std::string& sphere_path,
                              std::set<StageRef>& stages) {
  for (const Machine& machine : sphere.machines) {
    for (StageKind kind : machine.stages) {
      stages.insert(StageRef{sphere_path, machine.thing_name, kind});
    }
  }
  for (const Sphere& sub : sphere.subspheres) {
    add_sphere_stages(sub, sphere_path + "." + sub.name, stages);
  }
}

inline void close_flows(const Schema& schema, Region& region) {
  for (std::size_t i = 0; i < schema.flows.size(); ++i) {
    const FlowArc& arc = schema.flows[i];
    if (region.stages.count(arc.source) != 0 &&
        region.stages.count(arc.target) != 0) {
      region.flows.insert(static_cast<int>(i));
    }
  }
}

}  // namespace detail

// Expands a set of references into the closed diagram fragment they name:
// machine refs become all their stages, sphere refs expand recursively, and
// every flow arc with both endpoints inside is pulled in. Idempotent and
// monotone. Throws on any reference that does not resolve.
inline Region region_closure(const Schema& schema, std::span<const Ref> refs) {
  Region region;
  for (const Ref& ref : refs) {
    std::visit(
        detail::Overloaded{
            [&](const SphereRef& sphere_ref) {
              const Sphere* sphere = find_sphere(schema, sphere_ref.path);
              if (sphere == nullptr) {
                throw std::invalid_argument("no such sphere: " + sphere_ref.path);
              }
              detail::add_sphere_stages(*sphere, sphere_ref.path, region.stages);
            },
            [&](const MachineRef& machine_ref) {
              const Machine* machine = find_machine(
                  schema, machine_ref.sphere_path, machine_ref.machine);
              if (machine == nullptr) {
                throw std::invalid_argument("no such machine: " +
                                            machine_ref.path());
              }
              for (StageKind kind : machine->stages) {
                region.stages.insert(StageRef{machine_ref.sphere_path,
                                              machine_ref.machine, kind});
              }
            },
            [&](const StageRef& stage_ref) {
              if (!stage_exists(schema, stage_ref)) {
                throw std::invalid_argument("no such stage: " + stage_ref.path());
              }
              region.stages.insert(stage_ref);
            },
        },
        ref);
  }
  detail::close_flows(schema, region);
  return region;
}

// Re-closes an already-built region; with a region from region_closure this
// is the identity.
inline Region region_closure(const Schema& schema, const Region& region) {
  Region out = region;
  detail::close_flows(schema, out);
  return out;
}

namespace detail {

inline void fnv_mix(std::uint64_t& hash, std::string_view bytes) {
  for (unsigned char byte : bytes) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  hash ^= 0xff;
  hash *= 1099511628211ull;
}

inline void fingerprint_sphere(std::uint64_t& hash, const Sphere& sphere) {
  fnv_mix(hash, "s");
  fnv_mix(hash, sphere.name);
  for (const Machine& machine : sphere.machines) {
    fnv_mix(hash, "m");
    fnv_mix(hash, machine.thing_name);
    for (StageKind kind : machine.stages) fnv_mix(hash, to_string(kind));
    if (machine.has_storage) fnv_mix(hash, "storage");
    for (StageKind kind : machine.storage_links) fnv_mix(hash, to_string(kind));
  }
  for (const Sphere& sub : sphere.subspheres) fingerprint_sphere(hash, sub);
  fnv_mix(hash, "e");
}

}  // namespace detail

// Stable identity of the static graph (spheres, machines, flows, triggers).
// Events and declared traces are excluded so that defining an event does not
// invalidate tags handed out earlier.
inline std::uint64_t schema_fingerprint(const Schema& schema) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const Sphere& sphere : schema.spheres) {
    detail::fingerprint_sphere(hash, sphere);
  }
  for (const FlowArc& arc : schema.flows) {
    detail::fnv_mix(hash, "f");
    detail::fnv_mix(hash, arc.source.path());
    detail::fnv_mix(hash, arc.target.path());
  }
  for (const TriggerArc& trigger : schema.triggers) {
    detail::fnv_mix(hash, "t");
    if (const auto* stage = std::get_if<StageRef>(&trigger.source)) {
      detail::fnv_mix(hash, stage->path());
    } else {
      detail::fnv_mix(hash, std::to_string(std::get<int>(trigger.source)));
    }
    detail::fnv_mix(hash, trigger.target.path());
  }
  return hash;
}

}  // namespace fm
