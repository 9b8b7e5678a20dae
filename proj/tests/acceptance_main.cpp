// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Thresholds and tolerances are pinned in code.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fm/cli.hpp"
#include "fm/fm.hpp"

using namespace fm;

namespace {

struct Expect {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      notes.push_back(what);
    }
  }
};

std::string corpus_path(const std::string& name) {
  return std::string(FM_CORPUS_DIR) + "/" + name;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Schema load_schema(const std::string& name) {
  ParseResult result = parse_schema(read_file(corpus_path(name)), name);
  if (!result.ok()) throw std::runtime_error("parse failed: " + name);
  result.schema->name = name.substr(0, name.find_last_of('.'));
  return *std::move(result.schema);
}

Scenario load_scenario(const std::string& name) {
  ScenarioParseResult result =
      parse_scenario(read_file(corpus_path(name)), name);
  if (!result.ok()) throw std::runtime_error("scenario parse failed: " + name);
  result.scenario->name = name.substr(0, name.find_last_of('.'));
  return *std::move(result.scenario);
}

std::vector<std::string> flat_names(const Trace& trace) {
  std::vector<std::string> names;
  for (const EventInstance& instance : trace.flattened()) {
    names.push_back(instance.event);
  }
  return names;
}

const char* kCorpus[] = {"needle.fm",      "hyde_park.fm",     "phoebe.fm",
                         "robots_ball.fm", "professor_car.fm", "lewis.fm"};

// ---------------------------------------------------------------------------
// 1. Corpus completeness: six schemas, zero validation errors, < 1 s each.

Expect criterion_corpus() {
  Expect e;
  for (const char* name : kCorpus) {
    const auto started = std::chrono::steady_clock::now();
    Schema schema;
    try {
      schema = load_schema(name);
    } catch (const std::exception& ex) {
      e.require(false, std::string(name) + ": " + ex.what());
      continue;
    }
    const auto diagnostics = validate(schema);
    e.require(!has_errors(diagnostics),
              std::string(name) + " has validation errors");
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    e.require(elapsed < 1000, std::string(name) + " took " +
                                  std::to_string(elapsed) + " ms (budget 1000)");
  }
  // Signature content per model.
  e.require(load_schema("needle.fm").find_event("NeedleEvent") != nullptr,
            "needle.fm lacks NeedleEvent");
  {
    const Schema park = load_schema("hyde_park.fm");
    for (const char* v : {"V1", "V2", "V3", "V4", "V5"}) {
      e.require(park.find_event(v) != nullptr,
                std::string("hyde_park.fm lacks ") + v);
    }
  }
  {
    const Schema phoebe = load_schema("phoebe.fm");
    e.require(phoebe.spheres.size() == 2, "phoebe.fm needs past and present");
    e.require(phoebe.find_event("FeedingEvent") != nullptr &&
                  phoebe.find_event("Retelling") != nullptr,
              "phoebe.fm lacks its two events");
  }
  {
    const Schema robots = load_schema("robots_ball.fm");
    for (const char* s : {"Station", "Robot1", "Robot2", "Air"}) {
      e.require(find_sphere(robots, s) != nullptr,
                std::string("robots_ball.fm lacks sphere ") + s);
    }
    for (const char* v : {"Robot1Receive", "Robot2Receive", "Event2", "Event3"}) {
      e.require(robots.find_event(v) != nullptr,
                std::string("robots_ball.fm lacks ") + v);
    }
  }
  {
    const Schema car = load_schema("professor_car.fm");
    for (const char* v : {"V1", "V2", "V3", "V4", "V5", "V6"}) {
      e.require(car.find_event(v) != nullptr,
                std::string("professor_car.fm lacks ") + v);
    }
    e.require(car.declared_traces.size() == 2,
              "professor_car.fm declares both traces");
  }
  {
    const Schema lewis = load_schema("lewis.fm");
    for (const char* v : {"V1", "V2", "V3", "V4", "Walking", "WalkingSlowly",
                          "WalkingNonslowly", "NonwalkingSlowly",
                          "NonwalkingNonslowly"}) {
      e.require(lewis.find_event(v) != nullptr,
                std::string("lewis.fm lacks ") + v);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// 2. Containment claims on the walking/slowness model.

Expect criterion_containment() {
  Expect e;
  const Schema schema = load_schema("lewis.fm");
  const EventDef& walking = *schema.find_event("Walking");
  const EventDef& walking_slowly = *schema.find_event("WalkingSlowly");
  e.require(contains(walking_slowly, walking),
            "contains(WalkingSlowly, Walking) must be true");
  e.require(!contains(walking, walking_slowly),
            "contains(Walking, WalkingSlowly) must be false");

  const std::map<std::string, std::pair<std::string, std::string>> combined = {
      {"WalkingSlowly", {"V2", "V3"}},
      {"WalkingNonslowly", {"V2", "V4"}},
      {"NonwalkingSlowly", {"V1", "V3"}},
      {"NonwalkingNonslowly", {"V1", "V4"}},
  };
  for (const auto& [name, parts] : combined) {
    const std::vector<EventDef> part_defs = {*schema.find_event(parts.first),
                                             *schema.find_event(parts.second)};
    const EventDef composed = compose(schema, name + "_composed", part_defs);
    e.require(composed.region == schema.find_event(name)->region,
              name + ": composed region differs from the declared one");
    for (const EventDef& part : part_defs) {
      e.require(implies(composed, part),
                name + " must imply its part " + part.name);
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// 3. Sub-trace claim on the professor's car.

Expect criterion_subtrace_claim() {
  Expect e;
  const Schema schema = load_schema("professor_car.fm");
  const SimResult nodelay = simulate(schema, load_scenario("nodelay.fms"));
  const SimResult withdelay = simulate(schema, load_scenario("withdelay.fms"));
  e.require(subtrace(nodelay.trace, withdelay.trace),
            "the no-delay trace must embed in the with-delay trace");
  int v1_count = 0;
  for (const std::string& name : flat_names(withdelay.trace)) {
    if (name == "V1") ++v1_count;
  }
  e.require(v1_count == 2, "V1 must occur exactly twice with delay, got " +
                               std::to_string(v1_count));
  e.require(trace_time(withdelay.trace) > trace_time(nodelay.trace),
            "delay must increase the trace time (" +
                std::to_string(trace_time(withdelay.trace)) + " vs " +
                std::to_string(trace_time(nodelay.trace)) + ")");
  return e;
}

// ---------------------------------------------------------------------------
// 4. Simultaneity: one parallel group for the robots, one for the ball.

Expect criterion_simultaneity() {
  Expect e;
  const Schema schema = load_schema("robots_ball.fm");
  const SimResult robots = simulate(schema, load_scenario("robots.fms"));
  bool robots_together = false;
  for (const auto& [tick, names] : parallel_groups(robots.trace)) {
    if (names.count("Robot1Receive") != 0 && names.count("Robot2Receive") != 0) {
      robots_together = true;
    }
  }
  e.require(robots_together,
            "Robot1Receive and Robot2Receive must share a parallel group");

  const SimResult ball = simulate(schema, load_scenario("ball.fms"));
  bool ball_together = false;
  for (const auto& [tick, names] : parallel_groups(ball.trace)) {
    if (names.count("Event2") != 0 && names.count("Event3") != 0) {
      ball_together = true;
    }
  }
  e.require(ball_together,
            "heating and rotating must share a group when co-injected");
  return e;
}

// ---------------------------------------------------------------------------
// 5. Time-machine series on the needle model.

Expect criterion_time_machine() {
  Expect e;
  const Schema schema = load_schema("needle.fm");
  const Scenario scenario = load_scenario("needle.fms");
  e.require(scenario.time_machine.has_value() &&
                scenario.time_machine->period == 1 &&
                scenario.time_machine->slice_count == 3,
            "needle.fms must configure period 1, count 3");
  const SimResult result = simulate(schema, scenario);
  const auto names = flat_names(result.trace);
  e.require(names.size() == 3, "exactly 3 event instances, got " +
                                   std::to_string(names.size()));
  for (std::size_t k = 0; k < result.trace.groups.size(); ++k) {
    const EventInstance& instance = result.trace.groups[k].front();
    e.require(instance.event == "NeedleEvent" &&
                  instance.start == static_cast<int>(k),
              "instance " + std::to_string(k) + " must start at tick " +
                  std::to_string(k));
  }
  int creates = 0;
  for (const LogEntry& entry : result.log) {
    if (const auto* stage = std::get_if<StageRef>(&entry.location)) {
      if (*stage == StageRef{"Embankment", "Needle", StageKind::Create}) {
        ++creates;
      }
    }
  }
  e.require(creates == 3, "log must show 3 Create occupancies of the Needle "
                          "machine, got " +
                              std::to_string(creates));
  return e;
}

// ---------------------------------------------------------------------------
// 6. Oracle equivalence: subtrace vs exhaustive embedding enumeration over
//    every grouped trace of length <= 5 on 4 names; contains vs brute-force
//    subset tests on 1,000 random region pairs over a 10-stage universe.

const std::string kTraceNames[4] = {"A", "B", "C", "D"};

struct EnumeratedTrace {
  Trace trace;
  std::vector<algebra_detail::FlatItem> flat;
};

std::vector<EnumeratedTrace> enumerate_traces() {
  std::vector<EnumeratedTrace> out;
  for (int length = 0; length <= 5; ++length) {
    long name_combos = 1;
    for (int i = 0; i < length; ++i) name_combos *= 4;
    const int break_patterns = length <= 1 ? 1 : 1 << (length - 1);
    for (long combo = 0; combo < name_combos; ++combo) {
      for (int breaks = 0; breaks < break_patterns; ++breaks) {
        Trace trace;
        long rest = combo;
        int group = 0;
        std::vector<EventInstance> current;
        for (int i = 0; i < length; ++i) {
          current.push_back(EventInstance{
              kTraceNames[rest % 4], group, group + 1, {}});
          rest /= 4;
          const bool break_here = i + 1 < length && ((breaks >> i) & 1) != 0;
          if (break_here || i + 1 == length) {
            trace.groups.push_back(std::move(current));
            current.clear();
            ++group;
          }
        }
        EnumeratedTrace entry;
        entry.trace = std::move(trace);
        for (std::size_t g = 0; g < entry.trace.groups.size(); ++g) {
          for (const EventInstance& instance : entry.trace.groups[g]) {
            entry.flat.push_back({&kTraceNames[instance.event[0] - 'A'],
                                  static_cast<int>(g)});
          }
        }
        out.push_back(std::move(entry));
      }
    }
  }
  return out;
}

// Brute force: try every strictly increasing assignment of reference
// positions; names must match and co-grouped candidates must stay co-grouped.
bool oracle_embeds(const std::vector<algebra_detail::FlatItem>& c,
                   const std::vector<algebra_detail::FlatItem>& r) {
  const unsigned k = static_cast<unsigned>(c.size());
  const unsigned n = static_cast<unsigned>(r.size());
  if (k > n) return false;
  if (k == 0) return true;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<unsigned>(__builtin_popcount(mask)) != k) continue;
    int positions[5];
    unsigned index = 0;
    bool ok = true;
    for (unsigned j = 0; j < n; ++j) {
      if ((mask >> j) & 1u) {
        if (*c[index].name != *r[j].name) {
          ok = false;
          break;
        }
        positions[index++] = static_cast<int>(j);
      }
    }
    if (!ok) continue;
    for (unsigned i = 0; i < k && ok; ++i) {
      for (unsigned j = i + 1; j < k && ok; ++j) {
        if (c[i].group == c[j].group &&
            r[positions[i]].group != r[positions[j]].group) {
          ok = false;
        }
      }
    }
    if (ok) return true;
  }
  return false;
}

Expect criterion_oracles() {
  Expect e;
  const std::vector<EnumeratedTrace> traces = enumerate_traces();
  e.require(traces.size() == 18725,
            "expected 18725 grouped traces, got " + std::to_string(traces.size()));

  // The public entry point and its flattened core must agree; checked on a
  // random sample before the exhaustive sweep runs on the core directly.
  std::mt19937 sample_rng(99);
  for (int round = 0; round < 50000; ++round) {
    const EnumeratedTrace& c = traces[sample_rng() % traces.size()];
    const EnumeratedTrace& r = traces[sample_rng() % traces.size()];
    const bool via_api = subtrace(c.trace, r.trace);
    const bool via_core = algebra_detail::embeds(c.flat, r.flat, 0, 0, -1);
    if (via_api != via_core) {
      e.require(false, "subtrace disagrees with its flattened core");
      break;
    }
  }

  const unsigned worker_count =
      std::max(1u, std::min(8u, std::thread::hardware_concurrency()));
  std::atomic<long long> mismatches{0};
  std::atomic<long long> positives{0};
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < worker_count; ++w) {
    workers.emplace_back([&traces, &mismatches, &positives, worker_count, w] {
      long long local_positive = 0;
      for (std::size_t i = w; i < traces.size(); i += worker_count) {
        const auto& candidate = traces[i].flat;
        for (const EnumeratedTrace& reference : traces) {
          const bool implementation =
              algebra_detail::embeds(candidate, reference.flat, 0, 0, -1);
          const bool expected = oracle_embeds(candidate, reference.flat);
          if (implementation != expected) {
            ++mismatches;
            return;
          }
          local_positive += implementation ? 1 : 0;
        }
      }
      positives += local_positive;
    });
  }
  for (std::thread& worker : workers) worker.join();
  e.require(mismatches.load() == 0,
            "subtrace disagrees with the exhaustive oracle");
  e.require(positives.load() > 0, "the sweep must find embeddings");

  // contains vs brute-force subset testing over a 10-stage universe.
  Schema universe;
  {
    Sphere sphere;
    sphere.name = "U";
    for (int m = 0; m < 5; ++m) {
      Machine machine;
      machine.thing_name = std::string("M") + std::to_string(m);
      machine.stages = {StageKind::Create, StageKind::Process};
      sphere.machines.push_back(std::move(machine));
    }
    universe.spheres.push_back(std::move(sphere));
    for (int m = 0; m < 5; ++m) {
      const std::string thing = std::string("M") + std::to_string(m);
      universe.flows.push_back(FlowArc{StageRef{"U", thing, StageKind::Create},
                                       StageRef{"U", thing, StageKind::Process},
                                       m});
    }
  }
  std::vector<StageRef> stages;
  for (const Machine& machine : universe.spheres[0].machines) {
    for (StageKind kind : machine.stages) {
      stages.push_back(StageRef{"U", machine.thing_name, kind});
    }
  }
  e.require(stages.size() == 10, "universe must have 10 stages");
  std::mt19937 rng(123456);
  int checked = 0;
  for (int round = 0; round < 1000; ++round) {
    std::set<StageRef> a_stages, b_stages;
    for (const StageRef& stage : stages) {
      if (rng() % 2 == 0) a_stages.insert(stage);
      if (rng() % 2 == 0) b_stages.insert(stage);
    }
    EventDef a, b;
    a.name = "a";
    b.name = "b";
    a.region = region_closure(universe, Region{a_stages, {}});
    b.region = region_closure(universe, Region{b_stages, {}});
    const bool expected =
        std::includes(a.region.stages.begin(), a.region.stages.end(),
                      b.region.stages.begin(), b.region.stages.end()) &&
        std::includes(a.region.flows.begin(), a.region.flows.end(),
                      b.region.flows.begin(), b.region.flows.end());
    if (contains(a, b) != expected) {
      e.require(false, "contains disagrees with subset testing");
      break;
    }
    ++checked;
  }
  e.require(checked == 1000, "all 1000 random region pairs must be checked");
  return e;
}

// ---------------------------------------------------------------------------
// 7. Determinism and round-trip.

struct CliCapture {
  int code = 0;
  std::string out;
  std::string err;
};

CliCapture run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliCapture capture;
  capture.code = cli::run(args, out, err);
  capture.out = out.str();
  capture.err = err.str();
  return capture;
}

Expect criterion_determinism() {
  Expect e;

  // Trace documents for the trace subcommands.
  const std::string tmp =
      (std::filesystem::temp_directory_path() / "fm_acceptance").string();
  std::filesystem::create_directories(tmp);
  const std::string nodelay_trace = tmp + "/nodelay.trace";
  const std::string withdelay_trace = tmp + "/withdelay.trace";
  {
    const Schema schema = load_schema("professor_car.fm");
    std::ofstream(nodelay_trace)
        << to_text(trace_to_document(simulate(schema, load_scenario("nodelay.fms"))));
    std::ofstream(withdelay_trace) << to_text(
        trace_to_document(simulate(schema, load_scenario("withdelay.fms"))));
  }

  std::vector<std::vector<std::string>> invocations;
  for (const char* name : kCorpus) {
    invocations.push_back({"validate", corpus_path(name)});
    invocations.push_back({"validate", corpus_path(name), "--format", "doc"});
    invocations.push_back({"fmt", "--check", corpus_path(name)});
    invocations.push_back({"render", corpus_path(name)});
  }
  invocations.push_back({"render", corpus_path("professor_car.fm"), "--event",
                         "V1", "--event", "V2", "--event", "V3", "--event",
                         "V4", "--event", "V5", "--event", "V6"});
  const std::pair<const char*, const char*> runs[] = {
      {"needle.fm", "needle.fms"},       {"hyde_park.fm", "hyde_park.fms"},
      {"phoebe.fm", "phoebe.fms"},       {"robots_ball.fm", "robots.fms"},
      {"robots_ball.fm", "ball.fms"},    {"professor_car.fm", "nodelay.fms"},
      {"professor_car.fm", "withdelay.fms"},
  };
  for (const auto& [schema_file, scenario_file] : runs) {
    for (const char* format : {"doc", "timeline"}) {
      invocations.push_back({"simulate", corpus_path(schema_file), "--scenario",
                             corpus_path(scenario_file), "--format", format});
    }
  }
  invocations.push_back({"trace", "contains", "--schema",
                         corpus_path("lewis.fm"), "--outer", "WalkingSlowly",
                         "--inner", "Walking"});
  invocations.push_back({"trace", "implies", "--schema",
                         corpus_path("lewis.fm"), "--premise", "WalkingSlowly",
                         "--conclusion", "Walking"});
  invocations.push_back({"trace", "subtrace", "--of", withdelay_trace,
                         "--candidate", nodelay_trace});
  invocations.push_back({"trace", "time", "--trace", withdelay_trace});

  for (const auto& invocation : invocations) {
    const CliCapture first = run_cli(invocation);
    const CliCapture second = run_cli(invocation);
    std::string label;
    for (const std::string& arg : invocation) label += arg + " ";
    e.require(first.code == second.code && first.out == second.out &&
                  first.err == second.err,
              "non-deterministic invocation: " + label);
  }

  // fmt idempotence and parse-format-parse identity.
  for (const char* name : kCorpus) {
    const std::string text = read_file(corpus_path(name));
    ParseResult first = parse_schema(text, name);
    e.require(first.ok(), std::string(name) + " must parse");
    if (!first.ok()) continue;
    const std::string once = format_schema(*first.schema);
    ParseResult second = parse_schema(once, name);
    e.require(second.ok(), std::string(name) + " canonical form must reparse");
    if (!second.ok()) continue;
    e.require(format_schema(*second.schema) == once,
              std::string(name) + ": fmt must be idempotent");
    e.require(first.schema->flows == second.schema->flows &&
                  first.schema->triggers == second.schema->triggers &&
                  first.schema->events == second.schema->events &&
                  first.schema->declared_traces == second.schema->declared_traces,
              std::string(name) + ": parse-format-parse must equal parse");
  }

  // Parser fuzzing: 10^4 random inputs, no crash, errors carry diagnostics.
  std::mt19937 rng(20250810);
  const std::string alphabet =
      "sphere machine stages storage flow trigger event trace region duration "
      "property inject time_machine max_ticks {}():,.@;~>\"\\\n\t\r# _-Vv123";
  for (int round = 0; round < 10000; ++round) {
    std::string text;
    const int length = static_cast<int>(rng() % 200);
    for (int i = 0; i < length; ++i) {
      text += (rng() % 5 == 0) ? static_cast<char>(rng() % 256)
                               : alphabet[rng() % alphabet.size()];
    }
    const ParseResult schema_result = parse_schema(text);
    if (!schema_result.ok() && schema_result.diagnostics.empty()) {
      e.require(false, "schema parse failed without diagnostics");
      break;
    }
    const ScenarioParseResult scenario_result = parse_scenario(text);
    if (!scenario_result.ok() && scenario_result.diagnostics.empty()) {
      e.require(false, "scenario parse failed without diagnostics");
      break;
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// 8. Validator rule coverage: a failing and a passing fixture per rule,
//    stable diagnostics.

Expect criterion_rules() {
  Expect e;

  auto failing = [&](const std::string& rule, const Schema& schema) {
    const auto diagnostics = validate(schema);
    bool found = false;
    for (const auto& d : diagnostics) {
      if (d.rule == rule) found = true;
    }
    e.require(found, rule + ": failing fixture produced no diagnostic");
  };
  auto make = [](std::vector<StageKind> stages) {
    Schema schema;
    Machine machine;
    machine.thing_name = "M";
    machine.stages = std::move(stages);
    Sphere sphere;
    sphere.name = "A";
    sphere.machines.push_back(std::move(machine));
    schema.spheres.push_back(std::move(sphere));
    return schema;
  };

  failing("V-EXCL", make({StageKind::Process, StageKind::Process}));
  failing("V-RECEP", make({StageKind::Receive, StageKind::Arrive}));
  {
    Schema schema = make({StageKind::Create, StageKind::Process});
    schema.flows.push_back(FlowArc{StageRef{"A", "M", StageKind::Process},
                                   StageRef{"A", "M", StageKind::Create}, 0});
    failing("V-FLOW", schema);
  }
  {
    Schema schema = make({StageKind::Release, StageKind::Process});
    Machine other;
    other.thing_name = "N";
    other.stages = {StageKind::Receive};
    schema.spheres[0].machines.push_back(std::move(other));
    schema.flows.push_back(FlowArc{StageRef{"A", "M", StageKind::Release},
                                   StageRef{"A", "N", StageKind::Receive}, 0});
    failing("V-XBOUND", schema);
  }
  {
    Schema schema = make({StageKind::Create, StageKind::Process});
    schema.triggers.push_back(TriggerArc{StageRef{"A", "M", StageKind::Process},
                                         StageRef{"A", "M", StageKind::Release},
                                         0});
    failing("V-TRIG", schema);
  }
  {
    Schema schema = make({StageKind::Create, StageKind::Process});
    EventDef event;
    event.name = "Empty";
    schema.events.push_back(std::move(event));
    failing("V-REGION", schema);
  }
  {
    Schema schema = make({StageKind::Create, StageKind::Process});
    schema.declared_traces.push_back(DeclaredTrace{"t", {"Ghost"}});
    failing("V-TRACE", schema);
  }
  {
    Schema schema = make({StageKind::Create});
    schema.spheres.push_back(schema.spheres[0]);
    failing("V-SPHERE", schema);
  }

  // Passing fixtures: the corpus emits no error for any rule; hyde_park and
  // professor_car are entirely diagnostic-free.
  for (const char* name : {"hyde_park.fm", "professor_car.fm"}) {
    e.require(validate(load_schema(name)).empty(),
              std::string(name) + " must validate with no diagnostics");
  }
  for (const char* name : kCorpus) {
    e.require(!has_errors(validate(load_schema(name))),
              std::string(name) + " must have no validation errors");
  }

  const Schema lewis = load_schema("lewis.fm");
  e.require(validate(lewis) == validate(lewis),
            "validate must be stable across runs");
  return e;
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* title;
    std::function<Expect()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "corpus completeness (six models, zero errors, < 1 s each)",
       criterion_corpus},
      {2, "containment claims on walking/slowness", criterion_containment},
      {3, "sub-trace claim on the professor's car", criterion_subtrace_claim},
      {4, "simultaneity groups (robots, ball)", criterion_simultaneity},
      {5, "time-machine series re-creates the needle", criterion_time_machine},
      {6, "oracle equivalence (exhaustive subtrace, random contains)",
       criterion_oracles},
      {7, "determinism, round-trip and fuzzing", criterion_determinism},
      {8, "validator rule coverage", criterion_rules},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    Expect result;
    try {
      result = criterion.run();
    } catch (const std::exception& ex) {
      result.ok = false;
      result.notes.push_back(std::string("exception: ") + ex.what());
    }
    std::printf("%s  %d  %s\n", result.ok ? "PASS" : "FAIL", criterion.number,
                criterion.title);
    if (!result.ok) {
      ++failures;
      for (const std::string& note : result.notes) {
        std::printf("      - %s\n", note.c_str());
      }
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
