#pragma once

// Command-line front end: parse -> validate -> simulate -> export with a
// stable exit-code contract.
//
//   0  success (boolean query answers never affect the exit code)
//   1  validation errors; unknown --event for render
//   2  usage errors, syntax failures, unreadable or unwritable files
//
// Semantic errors found at parse time (V-coded: stage exclusivity, name
// clashes, unresolvable references) count as validation errors (exit 1);
// only genuine syntax failures (P-coded) exit 2. Diagnostics go to the
// error stream, artifacts to the output stream.

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fm/core.hpp"
#include "fm/dsl.hpp"
#include "fm/event_algebra.hpp"
#include "fm/render.hpp"
#include "fm/simulate.hpp"
#include "fm/validate.hpp"

namespace fm::cli {

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out);
}

inline std::string file_stem(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

inline void print_parse_diagnostics(const std::vector<ParseDiagnostic>& diagnostics,
                                    std::ostream& err) {
  for (const ParseDiagnostic& d : diagnostics) {
    err << d.span.file << ":" << d.span.line << ":" << d.span.column << ": "
        << to_string(d.severity) << "[" << d.code << "]: " << d.message << "\n";
  }
}

inline void print_validation_diagnostics(
    const std::vector<ValidationDiagnostic>& diagnostics, std::ostream& err) {
  for (const ValidationDiagnostic& d : diagnostics) {
    err << to_string(d.severity) << "[" << d.rule << "] " << d.subject << ": "
        << d.message << "\n";
  }
}

inline bool only_semantic_errors(const std::vector<ParseDiagnostic>& diagnostics) {
  bool any_error = false;
  for (const ParseDiagnostic& d : diagnostics) {
    if (d.severity != Severity::Error) continue;
    any_error = true;
    if (d.code.rfind("V-", 0) != 0) return false;
  }
  return any_error;
}

struct LoadedSchema {
  std::optional<Schema> schema;
  std::vector<ParseDiagnostic> parse_diagnostics;
  int exit_code = 0;  // meaningful when schema is absent
};

inline LoadedSchema load_schema(const std::string& path, std::ostream& err) {
  LoadedSchema loaded;
  const auto text = read_file(path);
  if (!text) {
    err << "error: cannot read '" << path << "'\n";
    loaded.exit_code = 2;
    return loaded;
  }
  ParseResult result = parse_schema(*text, path);
  loaded.parse_diagnostics = std::move(result.diagnostics);
  if (!result.ok()) {
    print_parse_diagnostics(loaded.parse_diagnostics, err);
    loaded.exit_code = only_semantic_errors(loaded.parse_diagnostics) ? 1 : 2;
    return loaded;
  }
  result.schema->name = file_stem(path);
  loaded.schema = std::move(result.schema);
  return loaded;
}

namespace cli_detail {

inline nlohmann::ordered_json diagnostics_document(
    const std::string& file, const std::vector<ParseDiagnostic>& parse,
    const std::vector<ValidationDiagnostic>& validation) {
  nlohmann::ordered_json root;
  root["file"] = file;
  root["diagnostics"] = nlohmann::ordered_json::array();
  for (const ParseDiagnostic& d : parse) {
    nlohmann::ordered_json entry;
    entry["severity"] = to_string(d.severity);
    entry["rule"] = d.code;
    entry["message"] = d.message;
    entry["line"] = d.span.line;
    entry["column"] = d.span.column;
    entry["length"] = d.span.length;
    root["diagnostics"].push_back(std::move(entry));
  }
  for (const ValidationDiagnostic& d : validation) {
    nlohmann::ordered_json entry;
    entry["severity"] = to_string(d.severity);
    entry["rule"] = d.rule;
    entry["message"] = d.message;
    entry["subject"] = d.subject;
    root["diagnostics"].push_back(std::move(entry));
  }
  return root;
}

inline int cmd_validate(const std::string& file, const std::string& format,
                        std::ostream& out, std::ostream& err) {
  const auto text = read_file(file);
  if (!text) {
    err << "error: cannot read '" << file << "'\n";
    return 2;
  }
  ParseResult parsed = parse_schema(*text, file);
  std::vector<ValidationDiagnostic> validation;
  int code = 0;
  if (!parsed.ok()) {
    code = only_semantic_errors(parsed.diagnostics) ? 1 : 2;
  } else {
    validation = validate(*parsed.schema);
    code = has_errors(validation) ? 1 : 0;
  }
  if (format == "doc") {
    out << diagnostics_document(file, parsed.diagnostics, validation).dump(2)
        << "\n";
  } else {
    print_parse_diagnostics(parsed.diagnostics, err);
    print_validation_diagnostics(validation, err);
  }
  return code;
}

inline int cmd_fmt(const std::string& file, bool check, std::ostream& out,
                   std::ostream& err) {
  const auto text = read_file(file);
  if (!text) {
    err << "error: cannot read '" << file << "'\n";
    return 2;
  }
  ParseResult parsed = parse_schema(*text, file);
  if (!parsed.ok()) {
    print_parse_diagnostics(parsed.diagnostics, err);
    return 2;
  }
  const std::string canonical = format_schema(*parsed.schema);
  if (check) {
    if (*text == canonical) return 0;
    out << "needs formatting: " << file << "\n";
    return 1;
  }
  if (*text != canonical && !write_file(file, canonical)) {
    err << "error: cannot write '" << file << "'\n";
    return 2;
  }
  return 0;
}

inline int cmd_render(const std::string& file,
                      const std::vector<std::string>& event_names,
                      const std::string& output_path, std::ostream& out,
                      std::ostream& err) {
  LoadedSchema loaded = load_schema(file, err);
  if (!loaded.schema) return loaded.exit_code;
  const auto validation = validate(*loaded.schema);
  if (has_errors(validation)) {
    print_validation_diagnostics(validation, err);
    return 1;
  }
  std::vector<EventDef> overlays;
  for (const std::string& name : event_names) {
    const EventDef* event = loaded.schema->find_event(name);
    if (event == nullptr) {
      err << "error: unknown event '" << name << "'\n";
      return 1;
    }
    overlays.push_back(*event);
  }
  const DotDocument dot = to_dot(*loaded.schema, overlays);
  if (output_path.empty()) {
    out << dot.text;
    return 0;
  }
  if (!write_file(output_path, dot.text)) {
    err << "error: cannot write '" << output_path << "'\n";
    return 2;
  }
  return 0;
}

inline int cmd_simulate(const std::string& file, const std::string& scenario_file,
                        const std::string& inline_text, int max_ticks_override,
                        const std::string& format, std::ostream& out,
                        std::ostream& err) {
  if (scenario_file.empty() == inline_text.empty()) {
    err << "error: provide exactly one of --scenario or --inline\n";
    return 2;
  }
  LoadedSchema loaded = load_schema(file, err);
  if (!loaded.schema) return loaded.exit_code;
  const auto validation = validate(*loaded.schema);
  if (has_errors(validation)) {
    print_validation_diagnostics(validation, err);
    return 1;
  }
  std::string scenario_text;
  std::string scenario_name;
  if (!scenario_file.empty()) {
    const auto text = read_file(scenario_file);
    if (!text) {
      err << "error: cannot read '" << scenario_file << "'\n";
      return 2;
    }
    scenario_text = *text;
    scenario_name = file_stem(scenario_file);
  } else {
    scenario_text = inline_text;
    scenario_name = "inline";
  }
  ScenarioParseResult parsed = parse_scenario(
      scenario_text, scenario_file.empty() ? "<inline>" : scenario_file);
  if (!parsed.ok()) {
    print_parse_diagnostics(parsed.diagnostics, err);
    return 2;
  }
  Scenario scenario = std::move(*parsed.scenario);
  scenario.name = scenario_name;
  if (max_ticks_override > 0) {
    scenario.max_ticks = max_ticks_override;
    for (const Injection& injection : scenario.injections) {
      if (injection.tick >= scenario.max_ticks) {
        err << "error: injection tick " << injection.tick
            << " is not below max_ticks " << scenario.max_ticks << "\n";
        return 2;
      }
    }
    if (scenario.time_machine &&
        static_cast<long long>(scenario.time_machine->period) *
                scenario.time_machine->slice_count >
            scenario.max_ticks) {
      err << "error: slice_count x period exceeds max_ticks "
          << scenario.max_ticks << "\n";
      return 2;
    }
  }
  SimResult result;
  try {
    result = simulate(*loaded.schema, scenario);
  } catch (const SimulationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (format == "timeline") {
    out << timeline(result);
  } else {
    out << to_text(trace_to_document(result));
  }
  if (result.terminated == Terminated::MaxTicks) {
    err << "warning: stopped at max_ticks with activity remaining\n";
  }
  return 0;
}

inline std::optional<Trace> load_trace(const std::string& path, std::ostream& err) {
  const auto text = read_file(path);
  if (!text) {
    err << "error: cannot read '" << path << "'\n";
    return std::nullopt;
  }
  std::string message;
  const auto document = parse_trace_document(*text, &message);
  if (!document) {
    err << "error: '" << path << "': " << message << "\n";
    return std::nullopt;
  }
  return to_trace(*document);
}

}  // namespace cli_detail

// Entry point shared by the binary and the tests. `args` excludes the
// program name.
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"flow machine modeling toolkit"};
  app.name("fm");
  app.require_subcommand(1);

  auto* validate_cmd =
      app.add_subcommand("validate", "Parse a schema and run the rule checks");
  std::string validate_file;
  std::string validate_format = "text";
  validate_cmd->add_option("file", validate_file, "schema file (.fm)")
      ->required();
  validate_cmd->add_option("--format", validate_format, "text or doc")
      ->check(CLI::IsMember({"text", "doc"}));

  auto* fmt_cmd = app.add_subcommand("fmt", "Rewrite a schema canonically");
  std::string fmt_file;
  bool fmt_check = false;
  fmt_cmd->add_option("file", fmt_file, "schema file (.fm)")->required();
  fmt_cmd->add_flag("--check", fmt_check,
                    "exit 1 when the file is not canonical, write nothing");

  auto* render_cmd = app.add_subcommand("render", "Export a schema as DOT");
  std::string render_file;
  std::vector<std::string> render_events;
  std::string render_output;
  render_cmd->add_option("file", render_file, "schema file (.fm)")->required();
  render_cmd->add_option("--event", render_events,
                         "overlay an event's region (repeatable)");
  render_cmd->add_option("-o,--output", render_output, "output path");

  auto* simulate_cmd =
      app.add_subcommand("simulate", "Run a scenario against a schema");
  std::string simulate_file;
  std::string simulate_scenario;
  std::string simulate_inline;
  int simulate_max_ticks = 0;
  std::string simulate_format = "doc";
  simulate_cmd->add_option("file", simulate_file, "schema file (.fm)")
      ->required();
  simulate_cmd->add_option("--scenario", simulate_scenario,
                           "scenario file (.fms)");
  simulate_cmd->add_option("--inline", simulate_inline,
                           "scenario text, ';'-separated");
  simulate_cmd->add_option("--max-ticks", simulate_max_ticks,
                           "override the scenario's max_ticks")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--format", simulate_format, "doc or timeline")
      ->check(CLI::IsMember({"doc", "timeline"}));

  auto* trace_cmd =
      app.add_subcommand("trace", "Event and trace queries");
  trace_cmd->require_subcommand(1);

  auto* contains_cmd = trace_cmd->add_subcommand(
      "contains", "Region containment between two events");
  std::string contains_schema, contains_outer, contains_inner;
  contains_cmd->add_option("--schema", contains_schema)->required();
  contains_cmd->add_option("--outer", contains_outer)->required();
  contains_cmd->add_option("--inner", contains_inner)->required();

  auto* implies_cmd =
      trace_cmd->add_subcommand("implies", "Containment read causally");
  std::string implies_schema, implies_premise, implies_conclusion;
  implies_cmd->add_option("--schema", implies_schema)->required();
  implies_cmd->add_option("--premise", implies_premise)->required();
  implies_cmd->add_option("--conclusion", implies_conclusion)->required();

  auto* subtrace_cmd = trace_cmd->add_subcommand(
      "subtrace", "Is one trace embedded in another?");
  std::string subtrace_of, subtrace_candidate;
  subtrace_cmd->add_option("--of", subtrace_of, "reference trace document")
      ->required();
  subtrace_cmd->add_option("--candidate", subtrace_candidate)->required();

  auto* time_cmd = trace_cmd->add_subcommand("time", "Trace time in ticks");
  std::string time_trace;
  time_cmd->add_option("--trace", time_trace, "trace document")->required();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("fm");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (validate_cmd->parsed()) {
    return cli_detail::cmd_validate(validate_file, validate_format, out, err);
  }
  if (fmt_cmd->parsed()) {
    return cli_detail::cmd_fmt(fmt_file, fmt_check, out, err);
  }
  if (render_cmd->parsed()) {
    return cli_detail::cmd_render(render_file, render_events, render_output,
                                  out, err);
  }
  if (simulate_cmd->parsed()) {
    return cli_detail::cmd_simulate(simulate_file, simulate_scenario,
                                    simulate_inline, simulate_max_ticks,
                                    simulate_format, out, err);
  }
  if (trace_cmd->parsed()) {
    if (contains_cmd->parsed() || implies_cmd->parsed()) {
      const bool is_contains = contains_cmd->parsed();
      const std::string& schema_path =
          is_contains ? contains_schema : implies_schema;
      const std::string& first = is_contains ? contains_outer : implies_premise;
      const std::string& second =
          is_contains ? contains_inner : implies_conclusion;
      LoadedSchema loaded = load_schema(schema_path, err);
      if (!loaded.schema) return 2;
      const EventDef* a = loaded.schema->find_event(first);
      const EventDef* b = loaded.schema->find_event(second);
      if (a == nullptr || b == nullptr) {
        err << "error: unknown event '" << (a == nullptr ? first : second)
            << "'\n";
        return 2;
      }
      const bool answer = is_contains ? contains(*a, *b) : implies(*a, *b);
      out << (answer ? "true" : "false") << "\n";
      return 0;
    }
    if (subtrace_cmd->parsed()) {
      const auto reference = cli_detail::load_trace(subtrace_of, err);
      const auto candidate = cli_detail::load_trace(subtrace_candidate, err);
      if (!reference || !candidate) return 2;
      out << (subtrace(*candidate, *reference) ? "true" : "false") << "\n";
      return 0;
    }
    if (time_cmd->parsed()) {
      const auto trace = cli_detail::load_trace(time_trace, err);
      if (!trace) return 2;
      if (trace->empty()) {
        err << "error: trace is empty\n";
        return 2;
      }
      out << trace_time(*trace) << "\n";
      return 0;
    }
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace fm::cli
