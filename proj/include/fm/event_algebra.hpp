#pragma once

// Events as first-class things: definitions over schema regions, the
// containment/implication order, composition, and the trace relations.
//
// All spans are half-open ticks: an instance [0, 1) lasted one tick and has
// trace time 1. Precondition violations (empty region, duplicate name,
// cross-schema comparison, empty trace) throw std::invalid_argument.

#include <compare>
#include <functional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fm/core.hpp"

namespace fm {

struct Gap {
  int from = 0;
  int to = 0;
  auto operator<=>(const Gap&) const = default;
};

// One occurrence of an event. Gaps (e.g. interruptions) lie strictly inside
// (start, end) and do not split the instance in two.
struct EventInstance {
  std::string event;
  int start = 0;
  int end = 0;
  std::vector<Gap> gaps;
  auto operator<=>(const EventInstance&) const = default;
};

// A sequence-or-group of instances: groups are ordered by strictly
// increasing start tick, every member of a group shares its start tick, and
// the stored order within a group is the flattening tie-break (the simulator
// uses event declaration order).
struct Trace {
  std::vector<std::vector<EventInstance>> groups;

  bool empty() const { return groups.empty(); }

  std::vector<EventInstance> flattened() const {
    std::vector<EventInstance> out;
    for (const auto& group : groups) {
      out.insert(out.end(), group.begin(), group.end());
    }
    return out;
  }

  bool operator==(const Trace&) const = default;
};

inline EventDef define_event(const Schema& schema, std::string name,
                             std::span<const Ref> refs, int duration = 1,
                             std::string label = "",
                             std::set<std::string> property_labels = {}) {
  if (schema.find_event(name) != nullptr) {
    throw std::invalid_argument("duplicate event name: " + name);
  }
  if (duration < 1) {
    throw std::invalid_argument("event duration must be at least 1");
  }
  Region region = region_closure(schema, refs);
  if (region.empty()) {
    throw std::invalid_argument("event '" + name + "' has an empty region");
  }
  EventDef event;
  event.name = std::move(name);
  event.label = std::move(label);
  event.region = std::move(region);
  event.duration = duration;
  event.property_labels = std::move(property_labels);
  event.schema_tag = schema_fingerprint(schema);
  return event;
}

namespace algebra_detail {

inline void require_same_schema(const EventDef& a, const EventDef& b) {
  if (a.schema_tag != 0 && b.schema_tag != 0 && a.schema_tag != b.schema_tag) {
    throw std::invalid_argument("events '" + a.name + "' and '" + b.name +
                                "' are defined against different schemas");
  }
}

}  // namespace algebra_detail

// True iff inner's region is contained in outer's. Containment is a partial
// order on event definitions (reflexive, transitive, antisymmetric up to
// region equality).
inline bool contains(const EventDef& outer, const EventDef& inner) {
  algebra_detail::require_same_schema(outer, inner);
  return outer.region.contains(inner.region);
}

// implies(a, b) is containment read causally: a implies b iff b's region is
// part of a's. Note the deliberate asymmetry of the negative direction:
// NOT implies(a, b) says nothing about non-occurrence, because a's
// non-occurrence may mean an alternative realization occurred (walking
// non-slowly instead of walking slowly).
inline bool implies(const EventDef& a, const EventDef& b) {
  return contains(a, b);
}

// Union of the parts' regions (re-closed), max duration, union of property
// labels. A trace can be wrapped as an event by composing its instances'
// definitions.
inline EventDef compose(const Schema& schema, std::string name,
                        std::span<const EventDef> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("compose requires at least one part");
  }
  EventDef event;
  event.name = std::move(name);
  event.duration = 1;
  for (const EventDef& part : parts) {
    algebra_detail::require_same_schema(parts.front(), part);
    event.region.stages.insert(part.region.stages.begin(),
                               part.region.stages.end());
    event.region.flows.insert(part.region.flows.begin(),
                              part.region.flows.end());
    event.duration = std::max(event.duration, part.duration);
    event.property_labels.insert(part.property_labels.begin(),
                                 part.property_labels.end());
  }
  event.region = region_closure(schema, event.region);
  event.schema_tag = parts.front().schema_tag;
  return event;
}

namespace algebra_detail {

struct FlatItem {
  const std::string* name;
  int group;
};

inline std::vector<FlatItem> flatten(const Trace& trace) {
  std::vector<FlatItem> out;
  for (std::size_t g = 0; g < trace.groups.size(); ++g) {
    for (const EventInstance& instance : trace.groups[g]) {
      out.push_back({&instance.event, static_cast<int>(g)});
    }
  }
  return out;
}

// Order-preserving embedding of candidate into reference such that any two
// candidate instances sharing a group land in one reference group.
inline bool embeds(const std::vector<FlatItem>& candidate,
                   const std::vector<FlatItem>& reference, std::size_t ci,
                   std::size_t rj, int bound_reference_group) {
  if (ci == candidate.size()) return true;
  if (candidate.size() - ci > reference.size() - rj) return false;
  const bool same_group_as_previous =
      ci > 0 && candidate[ci].group == candidate[ci - 1].group;
  for (std::size_t k = rj; k < reference.size(); ++k) {
    if (*candidate[ci].name != *reference[k].name) continue;
    if (same_group_as_previous && reference[k].group != bound_reference_group) {
      continue;
    }
    if (embeds(candidate, reference, ci + 1, k + 1, reference[k].group)) {
      return true;
    }
  }
  return false;
}

}  // namespace algebra_detail

// True iff candidate's flattened sequence embeds as an order-preserving
// subsequence of reference's, with every parallel co-occurrence in candidate
// mapping to a co-occurrence in reference. The empty trace is a subtrace of
// everything.
inline bool subtrace(const Trace& candidate, const Trace& reference) {
  const auto c = algebra_detail::flatten(candidate);
  const auto r = algebra_detail::flatten(reference);
  if (c.size() > r.size()) return false;
  return algebra_detail::embeds(c, r, 0, 0, -1);
}

// Max end minus min start over all instances.
inline int trace_time(const Trace& trace) {
  bool any = false;
  int min_start = 0;
  int max_end = 0;
  for (const auto& group : trace.groups) {
    for (const EventInstance& instance : group) {
      if (!any) {
        min_start = instance.start;
        max_end = instance.end;
        any = true;
      } else {
        min_start = std::min(min_start, instance.start);
        max_end = std::max(max_end, instance.end);
      }
    }
  }
  if (!any) throw std::invalid_argument("trace_time over an empty trace");
  return max_end - min_start;
}

// Projection of the trace's groups to (start tick, set of event names).
inline std::vector<std::pair<int, std::set<std::string>>> parallel_groups(
    const Trace& trace) {
  std::vector<std::pair<int, std::set<std::string>>> out;
  for (const auto& group : trace.groups) {
    if (group.empty()) continue;
    std::set<std::string> names;
    for (const EventInstance& instance : group) names.insert(instance.event);
    out.emplace_back(group.front().start, std::move(names));
  }
  return out;
}

}  // namespace fm
