#pragma once

// Deterministic discrete-tick execution. Identical inputs give bit-identical
// results; all tie-breaks are declaration order and token id order.
//
// Each tick T runs five phases:
//
//   1. Time machine: if slices remain and T = k*period, a slice is emitted.
//      The slice creates one instance of each target event spanning
//      [T, T+duration), and schedules a token creation at every Create stage
//      of the event's region for T+1 (the event re-creates its thing).
//   2. Creations due at T materialize: scenario injections in file order,
//      then trigger firings in schedule order. A new token occupies its
//      stage for the rest of the tick.
//   3. Movement: every token created before T that sits at a stage moves
//      along the first outgoing flow arc by declaration order. With no
//      outgoing arc it moves to the machine's storage when the stage has a
//      storage link, otherwise it quiesces. Stored and quiesced tokens are
//      inert from the next tick on.
//   4. Triggers: every trigger arc whose source stage was occupied at T (or
//      whose source flow arc was traversed at T) schedules one token
//      creation at its target for T+1 — once per arc per tick.
//   5. Event instances are derived from the log when the run ends: for each
//      event not driven by the time machine and each token that ever
//      occupied a stage of its region, one instance spans that token's
//      first..last occupancy tick (half-open end), idle interior ticks
//      recorded as gaps. Time-machine targets record only their slice
//      instances.
//
// The run stops at quiescence (no live tokens, no pending work) or at
// max_ticks; the latter is a warning carried in the result, not a failure.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fm/core.hpp"
#include "fm/dsl.hpp"
#include "fm/event_algebra.hpp"
#include "fm/validate.hpp"

namespace fm {

// Slice schedule of a time machine: slice_count ticks at multiples of period.
inline std::vector<int> time_machine_slices(const TimeMachine& config) {
  std::vector<int> ticks;
  ticks.reserve(static_cast<std::size_t>(config.slice_count));
  for (int k = 0; k < config.slice_count; ++k) {
    ticks.push_back(k * config.period);
  }
  return ticks;
}

struct StorageRef {
  std::string sphere_path;
  std::string machine;
  auto operator<=>(const StorageRef&) const = default;

  std::string path() const { return sphere_path + "." + machine + ".storage"; }
};

struct QuiescedTag {
  auto operator<=>(const QuiescedTag&) const = default;
};

using Location = std::variant<StageRef, StorageRef, QuiescedTag>;

inline std::string to_string(const Location& location) {
  if (const auto* stage = std::get_if<StageRef>(&location)) return stage->path();
  if (const auto* storage = std::get_if<StorageRef>(&location)) {
    return storage->path();
  }
  return "quiesced";
}

struct Token {
  int id = 0;
  std::string thing;
  Location at;
  int created_at = 0;
};

struct LogEntry {
  int tick = 0;
  int token = 0;
  Location location;

  bool operator==(const LogEntry&) const = default;
};

struct SimState {
  struct PendingFiring {
    int due = 0;
    StageRef target;
    int sequence = 0;  // FIFO tie-break within a tick
  };

  int clock = 0;
  std::vector<Token> tokens;
  std::vector<PendingFiring> pending;
  int next_sequence = 0;
  int emitted_slices = 0;
  std::vector<LogEntry> log;
};

enum class Terminated { Quiescence, MaxTicks };

inline const char* to_string(Terminated reason) {
  return reason == Terminated::Quiescence ? "quiescence" : "max_ticks";
}

struct SimResult {
  Trace trace;
  std::vector<LogEntry> log;
  Terminated terminated = Terminated::Quiescence;
  std::string schema_name;
  std::string scenario_name;
};

class SimulationError : public std::runtime_error {
 public:
  enum class Kind { ValidationFailed, UnresolvedScenarioRef };

  SimulationError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace sim_detail {

inline StageRef resolve_injection(const Schema& schema, const Injection& injection) {
  auto ref = resolve(schema, injection.path);
  if (!ref || !std::holds_alternative<StageRef>(*ref)) {
    throw SimulationError(SimulationError::Kind::UnresolvedScenarioRef,
                          "injection path '" + injection.path +
                              "' does not name a stage");
  }
  return std::get<StageRef>(*ref);
}

inline void check_scenario_refs(const Schema& schema, const Scenario& scenario) {
  for (const Injection& injection : scenario.injections) {
    resolve_injection(schema, injection);
  }
  if (scenario.time_machine) {
    for (const std::string& target : scenario.time_machine->targets) {
      if (schema.find_event(target) == nullptr) {
        throw SimulationError(SimulationError::Kind::UnresolvedScenarioRef,
                              "time machine target '" + target +
                                  "' is not a defined event");
      }
    }
  }
}

inline void create_token(const Schema& schema, SimState& state,
                         const StageRef& stage, int tick) {
  const Machine* machine = find_machine(schema, stage.sphere_path, stage.machine);
  Token token;
  token.id = static_cast<int>(state.tokens.size());
  token.thing = machine != nullptr ? machine->thing_name : stage.machine;
  token.at = stage;
  token.created_at = tick;
  state.log.push_back({tick, token.id, token.at});
  state.tokens.push_back(std::move(token));
}

}  // namespace sim_detail

// True while the state still has work now or later: a token at a stage, a
// scheduled firing, a future injection, or an unexpired time machine.
inline bool pending_work(const SimState& state, const Scenario& scenario) {
  for (const Token& token : state.tokens) {
    if (std::holds_alternative<StageRef>(token.at)) return true;
  }
  if (!state.pending.empty()) return true;
  for (const Injection& injection : scenario.injections) {
    if (injection.tick >= state.clock) return true;
  }
  if (scenario.time_machine &&
      state.emitted_slices < scenario.time_machine->slice_count) {
    return true;
  }
  return false;
}

// Advances the state by exactly one tick. Assumes simulate's preconditions
// (validated schema, resolvable scenario references).
inline SimState step(const Schema& schema, const SimState& state,
                     const Scenario& scenario) {
  SimState next = state;
  const int tick = next.clock;

  // (1) time machine
  if (scenario.time_machine &&
      next.emitted_slices < scenario.time_machine->slice_count &&
      tick == next.emitted_slices * scenario.time_machine->period) {
    for (const std::string& target : scenario.time_machine->targets) {
      const EventDef* event = schema.find_event(target);
      if (event == nullptr) continue;
      for (const StageRef& stage : event->region.stages) {
        if (stage.stage == StageKind::Create) {
          next.pending.push_back({tick + 1, stage, next.next_sequence++});
        }
      }
    }
    ++next.emitted_slices;
  }

  // (2) creations due now: injections first, then scheduled firings
  for (const Injection& injection : scenario.injections) {
    if (injection.tick == tick) {
      sim_detail::create_token(schema, next,
                               sim_detail::resolve_injection(schema, injection),
                               tick);
    }
  }
  std::vector<SimState::PendingFiring> still_pending;
  std::vector<SimState::PendingFiring> due;
  for (const auto& firing : next.pending) {
    (firing.due <= tick ? due : still_pending).push_back(firing);
  }
  std::stable_sort(due.begin(), due.end(),
                   [](const auto& a, const auto& b) {
                     return std::pair(a.due, a.sequence) <
                            std::pair(b.due, b.sequence);
                   });
  for (const auto& firing : due) {
    sim_detail::create_token(schema, next, firing.target, tick);
  }
  next.pending = std::move(still_pending);

  // (3) movement, in token id order
  std::set<int> traversed_arcs;
  const std::size_t preexisting = next.tokens.size();
  for (std::size_t i = 0; i < preexisting; ++i) {
    Token& token = next.tokens[i];
    const auto* stage = std::get_if<StageRef>(&token.at);
    if (stage == nullptr || token.created_at >= tick) continue;
    const std::vector<FlowArc> arcs = outgoing(schema, *stage);
    if (!arcs.empty()) {
      const FlowArc& arc = arcs.front();
      traversed_arcs.insert(arc.declaration_index);
      token.at = arc.target;
    } else {
      const Machine* machine =
          find_machine(schema, stage->sphere_path, stage->machine);
      const bool to_storage =
          machine != nullptr &&
          std::find(machine->storage_links.begin(), machine->storage_links.end(),
                    stage->stage) != machine->storage_links.end();
      if (to_storage) {
        token.at = StorageRef{stage->sphere_path, stage->machine};
      } else {
        token.at = QuiescedTag{};
      }
    }
    next.log.push_back({tick, token.id, token.at});
  }

  // (4) triggers active at this tick schedule creations for the next one
  std::set<StageRef> occupied;
  for (const LogEntry& entry : next.log) {
    if (entry.tick != tick) continue;
    if (const auto* stage = std::get_if<StageRef>(&entry.location)) {
      occupied.insert(*stage);
    }
  }
  for (const TriggerArc& trigger : schema.triggers) {
    bool active = false;
    if (const auto* stage = std::get_if<StageRef>(&trigger.source)) {
      active = occupied.count(*stage) != 0;
    } else {
      active = traversed_arcs.count(std::get<int>(trigger.source)) != 0;
    }
    if (active) {
      next.pending.push_back({tick + 1, trigger.target, next.next_sequence++});
    }
  }

  next.clock = tick + 1;
  return next;
}

namespace sim_detail {

inline Trace build_trace(const Schema& schema, const Scenario& scenario,
                         const SimState& state) {
  std::map<std::string, int> declaration_index;
  for (std::size_t i = 0; i < schema.events.size(); ++i) {
    declaration_index[schema.events[i].name] = static_cast<int>(i);
  }

  std::set<std::string> slice_driven;
  std::vector<EventInstance> instances;
  if (scenario.time_machine) {
    for (const std::string& target : scenario.time_machine->targets) {
      slice_driven.insert(target);
    }
    for (int k = 0; k < state.emitted_slices; ++k) {
      const int slice_tick = k * scenario.time_machine->period;
      for (const std::string& target : scenario.time_machine->targets) {
        const EventDef* event = schema.find_event(target);
        if (event == nullptr) continue;
        EventInstance instance;
        instance.event = target;
        instance.start = slice_tick;
        instance.end = std::min(slice_tick + event->duration, scenario.max_ticks);
        instances.push_back(std::move(instance));
      }
    }
  }

  // Occupancy instances, one per (event, token) that touched the region.
  for (const EventDef& event : schema.events) {
    if (slice_driven.count(event.name) != 0) continue;
    std::map<int, std::vector<int>> occupancy_ticks;  // token -> sorted ticks
    for (const LogEntry& entry : state.log) {
      const auto* stage = std::get_if<StageRef>(&entry.location);
      if (stage == nullptr || event.region.stages.count(*stage) == 0) continue;
      auto& ticks = occupancy_ticks[entry.token];
      if (ticks.empty() || ticks.back() != entry.tick) ticks.push_back(entry.tick);
    }
    for (const auto& [token, ticks] : occupancy_ticks) {
      EventInstance instance;
      instance.event = event.name;
      instance.start = ticks.front();
      instance.end = ticks.back() + 1;
      for (std::size_t i = 1; i < ticks.size(); ++i) {
        if (ticks[i] > ticks[i - 1] + 1) {
          instance.gaps.push_back(Gap{ticks[i - 1] + 1, ticks[i]});
        }
      }
      instances.push_back(std::move(instance));
    }
  }

  std::stable_sort(instances.begin(), instances.end(),
                   [&](const EventInstance& a, const EventInstance& b) {
                     const auto ia = declaration_index.find(a.event);
                     const auto ib = declaration_index.find(b.event);
                     const int da = ia == declaration_index.end() ? -1 : ia->second;
                     const int db = ib == declaration_index.end() ? -1 : ib->second;
                     return std::tuple(a.start, da, a.end, a.gaps) <
                            std::tuple(b.start, db, b.end, b.gaps);
                   });

  Trace trace;
  for (EventInstance& instance : instances) {
    if (trace.groups.empty() ||
        trace.groups.back().front().start != instance.start) {
      trace.groups.emplace_back();
    }
    trace.groups.back().push_back(std::move(instance));
  }
  return trace;
}

}  // namespace sim_detail

inline SimResult simulate(const Schema& schema, const Scenario& scenario) {
  if (has_errors(validate(schema))) {
    throw SimulationError(SimulationError::Kind::ValidationFailed,
                          "schema has validation errors");
  }
  sim_detail::check_scenario_refs(schema, scenario);

  SimState state;
  while (state.clock < scenario.max_ticks && pending_work(state, scenario)) {
    state = step(schema, state, scenario);
  }

  SimResult result;
  result.terminated = pending_work(state, scenario) ? Terminated::MaxTicks
                                                    : Terminated::Quiescence;
  result.trace = sim_detail::build_trace(schema, scenario, state);
  result.log = std::move(state.log);
  result.schema_name = schema.name;
  result.scenario_name = scenario.name;
  return result;
}

}  // namespace fm
