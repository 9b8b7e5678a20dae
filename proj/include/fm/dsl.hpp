#pragma once

// Textual language for flow-machine schemas and simulation scenarios.
//
// Schema files (.fm):
//
//   sphere Station {
//     machine Car {
//       stages: transfer, receive, process
//       storage: process
//     }
//     sphere Inner { ... }
//   }
//
//   flow Station.Car.transfer -> Station.Car.receive
//   trigger Station.Car.receive ~> Robot1.Car.receive
//   trigger (A.M.create -> A.M.process) ~> C.X.create
//
//   event V1 "free-text label" {
//     region: Station.Car, Robot1.Car.receive
//     duration 2
//     property slowness
//   }
//
//   trace nodelay: V1, V3
//
// Scenario files (.fms) are line- or semicolon-separated statements:
//
//   inject Station.Car.transfer @ 0
//   time_machine period 1 count 3 -> NeedleEvent
//   max_ticks 10
//
// `#` starts a line comment in both. Newlines are insignificant in schema
// files. References may appear before their declarations; resolution is a
// second pass. Parsing is total: no input crashes, failures come back as
// diagnostics ordered by (line, column). Machine-shape and reference errors
// carry validator rule codes (V-*); pure syntax errors carry P-* codes.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fm/core.hpp"

namespace fm {

struct SourceSpan {
  std::string file;
  int line = 1;    // 1-based
  int column = 1;  // 1-based, bytes
  int length = 0;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

inline const char* to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  SourceSpan span;
};

struct Injection {
  std::string path;  // unresolved; resolution happens against a schema
  int tick = 0;

  bool operator==(const Injection&) const = default;
};

struct TimeMachine {
  int period = 1;
  int slice_count = 1;
  std::vector<std::string> targets;  // event names

  bool operator==(const TimeMachine&) const = default;
};

struct Scenario {
  std::string name;  // set by loaders; "inline" for inline text
  std::vector<Injection> injections;
  std::optional<TimeMachine> time_machine;
  int max_ticks = 1;
};

struct ParseResult {
  std::optional<Schema> schema;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return schema.has_value(); }
};

struct ScenarioParseResult {
  std::optional<Scenario> scenario;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

namespace dsl_detail {

enum class Tok {
  Ident,
  Int,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Colon,
  Comma,
  Dot,
  At,
  Semi,
  Arrow,         // ->
  TriggerArrow,  // ~>
  Newline,       // only emitted in scenario mode
  End,
  Bad,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;  // Int payload
  int line = 1;
  int column = 1;
  int length = 0;
};

inline bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
inline bool digit(char c) { return c >= '0' && c <= '9'; }

// Byte-oriented lexer; anything outside the grammar becomes a Bad token
// rather than a failure, so arbitrary input can never crash the parser.
inline std::vector<Token> lex(std::string_view text, bool newline_tokens) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  int line = 1;
  int column = 1;
  auto push = [&](Tok kind, std::size_t begin, std::size_t end, int tok_line,
                  int tok_column, long long value = 0) {
    Token token;
    token.kind = kind;
    token.text.assign(text.substr(begin, end - begin));
    token.value = value;
    token.line = tok_line;
    token.column = tok_column;
    token.length = static_cast<int>(end - begin);
    tokens.push_back(std::move(token));
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\r') {
      ++i;
      ++column;
      continue;
    }
    if (c == '\n') {
      if (newline_tokens) push(Tok::Newline, i, i + 1, line, column);
      ++i;
      ++line;
      column = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\f' || c == '\v') {
      ++i;
      ++column;
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;  // column is reset at the newline
    }
    const int tok_line = line;
    const int tok_column = column;
    if (ident_start(c)) {
      std::size_t begin = i;
      while (i < text.size() && ident_char(text[i])) {
        ++i;
        ++column;
      }
      push(Tok::Ident, begin, i, tok_line, tok_column);
      continue;
    }
    if (digit(c) || (c == '-' && i + 1 < text.size() && digit(text[i + 1]))) {
      std::size_t begin = i;
      bool negative = c == '-';
      if (negative) {
        ++i;
        ++column;
      }
      long long value = 0;
      bool overflow = false;
      while (i < text.size() && digit(text[i])) {
        value = value * 10 + (text[i] - '0');
        if (value > 1000000000) {
          overflow = true;
          value = 1000000001;  // clamp; the token is rejected anyway
        }
        ++i;
        ++column;
      }
      if (overflow) {
        push(Tok::Bad, begin, i, tok_line, tok_column);
        tokens.back().text = "integer too large";
      } else {
        push(Tok::Int, begin, i, tok_line, tok_column, negative ? -value : value);
      }
      continue;
    }
    if (c == '"') {
      std::size_t begin = i;
      ++i;
      ++column;
      std::string content;
      bool closed = false;
      while (i < text.size() && text[i] != '\n') {
        char d = text[i];
        if (d == '\\' && i + 1 < text.size() &&
            (text[i + 1] == '"' || text[i + 1] == '\\')) {
          content += text[i + 1];
          i += 2;
          column += 2;
          continue;
        }
        ++i;
        ++column;
        if (d == '"') {
          closed = true;
          break;
        }
        content += d;
      }
      if (closed) {
        push(Tok::String, begin, i, tok_line, tok_column);
        tokens.back().text = std::move(content);
      } else {
        push(Tok::Bad, begin, i, tok_line, tok_column);
        tokens.back().text = "unterminated string";
      }
      continue;
    }
    auto two = [&](char second) {
      return i + 1 < text.size() && text[i + 1] == second;
    };
    Tok kind = Tok::Bad;
    int width = 1;
    switch (c) {
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case ':': kind = Tok::Colon; break;
      case ',': kind = Tok::Comma; break;
      case '.': kind = Tok::Dot; break;
      case '@': kind = Tok::At; break;
      case ';': kind = Tok::Semi; break;
      case '-':
        if (two('>')) {
          kind = Tok::Arrow;
          width = 2;
        }
        break;
      case '~':
        if (two('>')) {
          kind = Tok::TriggerArrow;
          width = 2;
        }
        break;
      default: break;
    }
    push(kind, i, i + width, tok_line, tok_column);
    if (kind == Tok::Bad) tokens.back().text = "unexpected character";
    i += width;
    column += width;
  }
  Token end_token;
  end_token.kind = Tok::End;
  end_token.line = line;
  end_token.column = column;
  tokens.push_back(std::move(end_token));
  return tokens;
}

inline constexpr int kMaxErrors = 100;
// Recursion guard, not a semantic limit: parsing is recursive per nesting
// level and must stay total on adversarial input.
inline constexpr int kMaxSphereDepth = 256;

struct PathWithSpan {
  std::string text;
  SourceSpan span;
};

struct RawFlow {
  PathWithSpan source;
  PathWithSpan target;
};

struct RawTrigger {
  bool arc_source = false;
  PathWithSpan source_a;  // stage path, or arc source when arc_source
  PathWithSpan source_b;  // arc target when arc_source
  PathWithSpan target;
};

struct RawEvent {
  std::string name;
  SourceSpan name_span;
  std::string label;
  std::vector<PathWithSpan> region;
  int duration = 1;
  std::set<std::string> properties;
};

struct RawTrace {
  std::string name;
  SourceSpan name_span;
  std::vector<PathWithSpan> events;
};

class SchemaParser {
 public:
  SchemaParser(std::string_view text, std::string_view filename)
      : file_(filename), tokens_(lex(text, /*newline_tokens=*/false)) {}

  ParseResult run() {
    parse_top_level();
    if (!has_error()) resolve_references();
    std::stable_sort(diagnostics_.begin(), diagnostics_.end(),
                     [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
                       return std::pair(a.span.line, a.span.column) <
                              std::pair(b.span.line, b.span.column);
                     });
    ParseResult result;
    result.diagnostics = std::move(diagnostics_);
    if (!schema_failed_) result.schema = std::move(schema_);
    return result;
  }

 private:
  const Token& peek(int ahead = 0) const {
    std::size_t index = pos_ + static_cast<std::size_t>(ahead);
    if (index >= tokens_.size()) index = tokens_.size() - 1;
    return tokens_[index];
  }
  const Token& advance() {
    const Token& token = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return token;
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  bool at_keyword(std::string_view word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }

  SourceSpan span_of(const Token& token) const {
    return SourceSpan{std::string(file_), token.line, token.column, token.length};
  }

  void report(Severity severity, std::string code, std::string message,
              const SourceSpan& span) {
    if (severity == Severity::Error) {
      schema_failed_ = true;
      ++error_count_;
    }
    if (error_count_ <= kMaxErrors) {
      diagnostics_.push_back(
          {severity, std::move(code), std::move(message), span});
    }
  }
  void syntax_error(std::string message) {
    const Token& token = peek();
    if (token.kind == Tok::Bad) message = token.text;
    report(Severity::Error, "P-SYNTAX", std::move(message), span_of(token));
  }
  bool has_error() const { return schema_failed_; }

  bool expect(Tok kind, std::string_view what) {
    if (at(kind)) {
      advance();
      return true;
    }
    syntax_error("expected " + std::string(what));
    return false;
  }

  // Skips ahead to the next plausible declaration boundary.
  void synchronize() {
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      if (depth == 0 && peek().kind == Tok::Ident) {
        const std::string& word = peek().text;
        if (word == "sphere" || word == "machine" || word == "flow" ||
            word == "trigger" || word == "event" || word == "trace") {
          return;
        }
      }
      advance();
    }
  }

  std::optional<PathWithSpan> parse_path() {
    if (!at(Tok::Ident)) {
      syntax_error("expected a dotted path");
      return std::nullopt;
    }
    const Token& first = advance();
    PathWithSpan path;
    path.text = first.text;
    path.span = span_of(first);
    while (at(Tok::Dot)) {
      advance();
      if (!at(Tok::Ident)) {
        syntax_error("expected identifier after '.'");
        return std::nullopt;
      }
      const Token& segment = advance();
      path.text += ".";
      path.text += segment.text;
      path.span.length = std::max(
          path.span.length, segment.column + segment.length - path.span.column);
    }
    return path;
  }

  void parse_top_level() {
    while (!at(Tok::End) && error_count_ <= kMaxErrors) {
      if (at_keyword("sphere")) {
        SourceSpan name_span;
        Sphere sphere = parse_sphere(name_span, 0);
        check_sibling_name(root_names_, sphere.name, name_span);
        schema_.spheres.push_back(std::move(sphere));
      } else if (at_keyword("flow")) {
        parse_flow();
      } else if (at_keyword("trigger")) {
        parse_trigger();
      } else if (at_keyword("event")) {
        parse_event();
      } else if (at_keyword("trace")) {
        parse_trace();
      } else {
        syntax_error("expected sphere, flow, trigger, event or trace");
        advance();
        synchronize();
      }
    }
  }

  void check_sibling_name(std::set<std::string>& names, const std::string& name,
                          const SourceSpan& span) {
    if (!name.empty() && !names.insert(name).second) {
      report(Severity::Error, "V-SPHERE",
             "duplicate name '" + name + "' at this nesting level", span);
    }
  }

  Sphere parse_sphere(SourceSpan& name_span, int depth) {
    advance();  // sphere
    Sphere sphere;
    if (at(Tok::Ident)) {
      const Token& name = advance();
      sphere.name = name.text;
      name_span = span_of(name);
    } else {
      syntax_error("expected sphere name");
      name_span = span_of(peek());
    }
    if (depth >= kMaxSphereDepth) {
      report(Severity::Error, "P-SYNTAX", "spheres nested too deeply",
             name_span);
      synchronize();
      return sphere;
    }
    if (!expect(Tok::LBrace, "'{'")) {
      synchronize();
      return sphere;
    }
    std::set<std::string> sibling_names;
    while (!at(Tok::RBrace) && !at(Tok::End) && error_count_ <= kMaxErrors) {
      if (at_keyword("sphere")) {
        SourceSpan sub_span;
        Sphere sub = parse_sphere(sub_span, depth + 1);
        check_sibling_name(sibling_names, sub.name, sub_span);
        sphere.subspheres.push_back(std::move(sub));
      } else if (at_keyword("machine")) {
        SourceSpan machine_span;
        Machine machine = parse_machine(machine_span);
        check_sibling_name(sibling_names, machine.thing_name, machine_span);
        sphere.machines.push_back(std::move(machine));
      } else {
        syntax_error("expected machine, sphere or '}'");
        advance();
        synchronize();
        break;
      }
    }
    expect(Tok::RBrace, "'}'");
    return sphere;
  }

  std::optional<StageKind> parse_stage_kind() {
    if (!at(Tok::Ident)) {
      syntax_error("expected a stage name");
      return std::nullopt;
    }
    const Token& token = advance();
    auto kind = stage_kind_from(token.text);
    if (!kind) {
      report(Severity::Error, "P-SYNTAX", "unknown stage '" + token.text + "'",
             span_of(token));
    }
    return kind;
  }

  Machine parse_machine(SourceSpan& machine_span) {
    advance();  // machine
    Machine machine;
    machine_span = span_of(peek());
    if (at(Tok::Ident)) {
      const Token& name = advance();
      machine.thing_name = name.text;
      machine_span = span_of(name);
    } else {
      syntax_error("expected machine name");
    }
    if (!expect(Tok::LBrace, "'{'")) {
      synchronize();
      return machine;
    }
    std::vector<std::pair<StageKind, SourceSpan>> storage_links;
    while (!at(Tok::RBrace) && !at(Tok::End) && error_count_ <= kMaxErrors) {
      if (at_keyword("stages")) {
        advance();
        expect(Tok::Colon, "':' after stages");
        do {
          SourceSpan span = span_of(peek());
          auto kind = parse_stage_kind();
          if (!kind) break;
          if (machine.has_stage(*kind)) {
            report(Severity::Error, "V-EXCL",
                   "stage '" + std::string(to_string(*kind)) +
                       "' declared more than once in machine '" +
                       machine.thing_name + "'",
                   span);
          } else {
            machine.stages.push_back(*kind);
          }
        } while (at(Tok::Comma) && (advance(), true));
      } else if (at_keyword("storage")) {
        advance();
        machine.has_storage = true;
        if (at(Tok::Colon)) {
          advance();
          do {
            SourceSpan span = span_of(peek());
            auto kind = parse_stage_kind();
            if (!kind) break;
            bool duplicate = false;
            for (const auto& [existing, _] : storage_links) {
              if (existing == *kind) duplicate = true;
            }
            if (duplicate) {
              report(Severity::Error, "V-FLOW",
                     "duplicate storage link for stage '" +
                         std::string(to_string(*kind)) + "'",
                     span);
            } else {
              storage_links.emplace_back(*kind, span);
            }
          } while (at(Tok::Comma) && (advance(), true));
        }
      } else {
        syntax_error("expected stages, storage or '}'");
        advance();
        synchronize();
        break;
      }
    }
    expect(Tok::RBrace, "'}'");
    if (machine.has_stage(StageKind::Receive) &&
        (machine.has_stage(StageKind::Arrive) ||
         machine.has_stage(StageKind::Accept))) {
      report(Severity::Error, "V-RECEP",
             "machine '" + machine.thing_name +
                 "' mixes receive with arrive/accept; reception is combined "
                 "or split, never both",
             machine_span);
    }
    for (const auto& [kind, span] : storage_links) {
      if (!machine.has_stage(kind)) {
        report(Severity::Error, "V-FLOW",
               "storage link references undeclared stage '" +
                   std::string(to_string(kind)) + "'",
               span);
      } else {
        machine.storage_links.push_back(kind);
      }
    }
    return machine;
  }

  void parse_flow() {
    advance();  // flow
    auto source = parse_path();
    if (!source || !expect(Tok::Arrow, "'->'")) {
      synchronize();
      return;
    }
    auto target = parse_path();
    if (!target) {
      synchronize();
      return;
    }
    raw_flows_.push_back(RawFlow{*source, *target});
  }

  void parse_trigger() {
    advance();  // trigger
    RawTrigger trigger;
    if (at(Tok::LParen)) {
      advance();
      trigger.arc_source = true;
      auto a = parse_path();
      if (!a || !expect(Tok::Arrow, "'->'")) {
        synchronize();
        return;
      }
      auto b = parse_path();
      if (!b || !expect(Tok::RParen, "')'")) {
        synchronize();
        return;
      }
      trigger.source_a = *a;
      trigger.source_b = *b;
    } else {
      auto source = parse_path();
      if (!source) {
        synchronize();
        return;
      }
      trigger.source_a = *source;
    }
    if (!expect(Tok::TriggerArrow, "'~>'")) {
      synchronize();
      return;
    }
    auto target = parse_path();
    if (!target) {
      synchronize();
      return;
    }
    trigger.target = *target;
    raw_triggers_.push_back(std::move(trigger));
  }

  void parse_event() {
    advance();  // event
    RawEvent event;
    if (at(Tok::Ident)) {
      const Token& name = advance();
      event.name = name.text;
      event.name_span = span_of(name);
    } else {
      syntax_error("expected event name");
      synchronize();
      return;
    }
    if (at(Tok::String)) event.label = advance().text;
    if (!expect(Tok::LBrace, "'{'")) {
      synchronize();
      return;
    }
    while (!at(Tok::RBrace) && !at(Tok::End) && error_count_ <= kMaxErrors) {
      if (at_keyword("region")) {
        advance();
        expect(Tok::Colon, "':' after region");
        do {
          auto path = parse_path();
          if (!path) break;
          event.region.push_back(*path);
        } while (at(Tok::Comma) && (advance(), true));
      } else if (at_keyword("duration")) {
        advance();
        if (at(Tok::Int)) {
          const Token& value = advance();
          if (value.value < 1) {
            report(Severity::Error, "P-RANGE", "duration must be at least 1",
                   span_of(value));
          } else {
            event.duration = static_cast<int>(value.value);
          }
        } else {
          syntax_error("expected an integer after duration");
        }
      } else if (at_keyword("property")) {
        advance();
        do {
          if (!at(Tok::Ident)) {
            syntax_error("expected a property name");
            break;
          }
          event.properties.insert(advance().text);
        } while (at(Tok::Comma) && (advance(), true));
      } else {
        syntax_error("expected region, duration, property or '}'");
        advance();
        synchronize();
        break;
      }
    }
    expect(Tok::RBrace, "'}'");
    raw_events_.push_back(std::move(event));
  }

  void parse_trace() {
    advance();  // trace
    RawTrace trace;
    if (at(Tok::Ident)) {
      const Token& name = advance();
      trace.name = name.text;
      trace.name_span = span_of(name);
    } else {
      syntax_error("expected trace name");
      synchronize();
      return;
    }
    expect(Tok::Colon, "':' after trace name");
    do {
      if (!at(Tok::Ident)) {
        syntax_error("expected an event name");
        synchronize();
        return;
      }
      const Token& event = advance();
      trace.events.push_back(PathWithSpan{event.text, span_of(event)});
    } while (at(Tok::Comma) && (advance(), true));
    raw_traces_.push_back(std::move(trace));
  }

  std::optional<StageRef> resolve_stage(const PathWithSpan& path,
                                        std::string_view code,
                                        std::string_view role) {
    auto ref = fm::resolve(schema_, path.text);
    if (!ref) {
      report(Severity::Error, std::string(code),
             std::string(role) + " '" + path.text + "' does not resolve",
             path.span);
      return std::nullopt;
    }
    if (const auto* stage = std::get_if<StageRef>(&*ref)) return *stage;
    report(Severity::Error, std::string(code),
           std::string(role) + " '" + path.text + "' is not a stage",
           path.span);
    return std::nullopt;
  }

  void resolve_references() {
    for (const RawFlow& raw : raw_flows_) {
      auto source = resolve_stage(raw.source, "V-FLOW", "flow source");
      auto target = resolve_stage(raw.target, "V-FLOW", "flow target");
      if (!source || !target) continue;
      if (*source == *target) {
        report(Severity::Error, "V-FLOW", "flow source and target coincide",
               raw.target.span);
        continue;
      }
      schema_.flows.push_back(
          FlowArc{*source, *target, static_cast<int>(schema_.flows.size())});
    }
    for (const RawTrigger& raw : raw_triggers_) {
      TriggerSource source;
      if (raw.arc_source) {
        auto a = resolve_stage(raw.source_a, "V-TRIG", "trigger source");
        auto b = resolve_stage(raw.source_b, "V-TRIG", "trigger source");
        if (!a || !b) continue;
        int index = -1;
        for (std::size_t i = 0; i < schema_.flows.size(); ++i) {
          if (schema_.flows[i].source == *a && schema_.flows[i].target == *b) {
            index = static_cast<int>(i);
            break;
          }
        }
        if (index < 0) {
          report(Severity::Error, "V-TRIG",
                 "trigger source names a flow arc that is not declared",
                 raw.source_a.span);
          continue;
        }
        source = index;
      } else {
        auto stage = resolve_stage(raw.source_a, "V-TRIG", "trigger source");
        if (!stage) continue;
        source = *stage;
      }
      auto target = resolve_stage(raw.target, "V-TRIG", "trigger target");
      if (!target) continue;
      schema_.triggers.push_back(TriggerArc{
          source, *target, static_cast<int>(schema_.triggers.size())});
    }
    const std::uint64_t tag = schema_fingerprint(schema_);
    for (const RawEvent& raw : raw_events_) {
      if (schema_.find_event(raw.name) != nullptr) {
        report(Severity::Error, "V-TRACE",
               "duplicate event name '" + raw.name + "'", raw.name_span);
        continue;
      }
      std::vector<Ref> refs;
      bool resolved = true;
      for (const PathWithSpan& path : raw.region) {
        auto ref = fm::resolve(schema_, path.text);
        if (!ref) {
          report(Severity::Error, "V-REGION",
                 "region reference '" + path.text + "' does not resolve",
                 path.span);
          resolved = false;
          continue;
        }
        refs.push_back(*ref);
      }
      if (!resolved) continue;
      Region region = region_closure(schema_, std::span<const Ref>(refs));
      if (region.empty()) {
        report(Severity::Error, "V-REGION",
               "event '" + raw.name + "' has an empty region", raw.name_span);
        continue;
      }
      EventDef event;
      event.name = raw.name;
      event.label = raw.label;
      event.region = std::move(region);
      event.duration = raw.duration;
      event.property_labels = raw.properties;
      event.schema_tag = tag;
      schema_.events.push_back(std::move(event));
    }
    std::set<std::string> trace_names;
    for (const RawTrace& raw : raw_traces_) {
      if (!trace_names.insert(raw.name).second) {
        report(Severity::Error, "V-TRACE",
               "duplicate trace name '" + raw.name + "'", raw.name_span);
        continue;
      }
      DeclaredTrace trace;
      trace.name = raw.name;
      bool resolved = true;
      for (const PathWithSpan& event : raw.events) {
        if (schema_.find_event(event.text) == nullptr) {
          report(Severity::Error, "V-TRACE",
                 "trace '" + raw.name + "' references undefined event '" +
                     event.text + "'",
                 event.span);
          resolved = false;
          continue;
        }
        trace.events.push_back(event.text);
      }
      if (resolved) schema_.declared_traces.push_back(std::move(trace));
    }
  }

  std::string_view file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diagnostics_;
  int error_count_ = 0;
  bool schema_failed_ = false;
  Schema schema_;
  std::set<std::string> root_names_;
  std::vector<RawFlow> raw_flows_;
  std::vector<RawTrigger> raw_triggers_;
  std::vector<RawEvent> raw_events_;
  std::vector<RawTrace> raw_traces_;
};

}  // namespace dsl_detail

inline ParseResult parse_schema(std::string_view text,
                                std::string_view filename = "<input>") {
  return dsl_detail::SchemaParser(text, filename).run();
}

namespace dsl_detail {

class ScenarioParser {
 public:
  ScenarioParser(std::string_view text, std::string_view filename)
      : file_(filename), tokens_(lex(text, /*newline_tokens=*/true)) {}

  ScenarioParseResult run() {
    while (!at_end() && error_count_ <= kMaxErrors) {
      skip_separators();
      if (at_end()) break;
      parse_statement();
    }
    if (!saw_max_ticks_ && error_count_ == 0) {
      report("P-RANGE", "scenario must declare max_ticks",
             SourceSpan{std::string(file_), peek().line, peek().column, 0});
    }
    if (error_count_ == 0) check_invariants();
    std::stable_sort(diagnostics_.begin(), diagnostics_.end(),
                     [](const ParseDiagnostic& a, const ParseDiagnostic& b) {
                       return std::pair(a.span.line, a.span.column) <
                              std::pair(b.span.line, b.span.column);
                     });
    ScenarioParseResult result;
    result.diagnostics = std::move(diagnostics_);
    if (error_count_ == 0) result.scenario = std::move(scenario_);
    return result;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() {
    const Token& token = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return token;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool at_separator() const {
    return peek().kind == Tok::Newline || peek().kind == Tok::Semi;
  }
  void skip_separators() {
    while (at_separator()) advance();
  }

  SourceSpan span_of(const Token& token) const {
    return SourceSpan{std::string(file_), token.line, token.column, token.length};
  }

  void report(std::string code, std::string message, const SourceSpan& span) {
    ++error_count_;
    if (error_count_ <= kMaxErrors) {
      diagnostics_.push_back(
          {Severity::Error, std::move(code), std::move(message), span});
    }
  }

  void skip_statement() {
    while (!at_end() && !at_separator()) advance();
  }

  std::optional<int> parse_int(std::string_view what, int minimum) {
    if (peek().kind != Tok::Int) {
      report("P-SYNTAX", "expected " + std::string(what), span_of(peek()));
      return std::nullopt;
    }
    const Token& token = advance();
    if (token.value < minimum) {
      report("P-RANGE",
             std::string(what) + " must be at least " + std::to_string(minimum),
             span_of(token));
      return std::nullopt;
    }
    return static_cast<int>(token.value);
  }

  std::optional<std::string> parse_path() {
    if (peek().kind != Tok::Ident) {
      report("P-SYNTAX", "expected a dotted path", span_of(peek()));
      return std::nullopt;
    }
    std::string path = advance().text;
    while (peek().kind == Tok::Dot) {
      advance();
      if (peek().kind != Tok::Ident) {
        report("P-SYNTAX", "expected identifier after '.'", span_of(peek()));
        return std::nullopt;
      }
      path += ".";
      path += advance().text;
    }
    return path;
  }

  void parse_statement() {
    if (peek().kind != Tok::Ident) {
      report("P-SYNTAX", "expected inject, time_machine or max_ticks",
             span_of(peek()));
      advance();
      skip_statement();
      return;
    }
    const std::string keyword = peek().text;
    if (keyword == "inject") {
      advance();
      auto path = parse_path();
      if (!path) {
        skip_statement();
        return;
      }
      if (peek().kind != Tok::At) {
        report("P-SYNTAX", "expected '@' before the injection tick",
               span_of(peek()));
        skip_statement();
        return;
      }
      advance();
      injection_spans_.push_back(span_of(peek()));
      auto tick = parse_int("injection tick", 0);
      if (!tick) {
        injection_spans_.pop_back();
        skip_statement();
        return;
      }
      scenario_.injections.push_back(Injection{*path, *tick});
    } else if (keyword == "time_machine") {
      const SourceSpan keyword_span = span_of(peek());
      advance();
      if (scenario_.time_machine) {
        report("P-SYNTAX", "duplicate time_machine statement", keyword_span);
        skip_statement();
        return;
      }
      if (peek().kind != Tok::Ident || peek().text != "period") {
        report("P-SYNTAX", "expected 'period'", span_of(peek()));
        skip_statement();
        return;
      }
      advance();
      auto period = parse_int("period", 1);
      if (!period) {
        skip_statement();
        return;
      }
      if (peek().kind != Tok::Ident || peek().text != "count") {
        report("P-SYNTAX", "expected 'count'", span_of(peek()));
        skip_statement();
        return;
      }
      advance();
      time_machine_span_ = span_of(peek());
      auto count = parse_int("count", 1);
      if (!count) {
        skip_statement();
        return;
      }
      if (peek().kind != Tok::Arrow) {
        report("P-SYNTAX", "expected '->' before target events",
               span_of(peek()));
        skip_statement();
        return;
      }
      advance();
      TimeMachine machine;
      machine.period = *period;
      machine.slice_count = *count;
      do {
        if (peek().kind != Tok::Ident) {
          report("P-SYNTAX", "expected an event name", span_of(peek()));
          skip_statement();
          return;
        }
        machine.targets.push_back(advance().text);
      } while (peek().kind == Tok::Comma && (advance(), true));
      scenario_.time_machine = std::move(machine);
    } else if (keyword == "max_ticks") {
      const SourceSpan keyword_span = span_of(peek());
      advance();
      if (saw_max_ticks_) {
        report("P-SYNTAX", "duplicate max_ticks statement", keyword_span);
        skip_statement();
        return;
      }
      auto ticks = parse_int("max_ticks", 1);
      if (!ticks) {
        skip_statement();
        return;
      }
      scenario_.max_ticks = *ticks;
      saw_max_ticks_ = true;
    } else {
      report("P-SYNTAX", "unknown statement '" + keyword + "'",
             span_of(peek()));
      advance();
      skip_statement();
    }
    if (!at_end() && !at_separator()) {
      report("P-SYNTAX", "unexpected input after statement", span_of(peek()));
      skip_statement();
    }
  }

  void check_invariants() {
    for (std::size_t i = 0; i < scenario_.injections.size(); ++i) {
      if (scenario_.injections[i].tick >= scenario_.max_ticks) {
        report("P-RANGE",
               "injection tick " + std::to_string(scenario_.injections[i].tick) +
                   " is not below max_ticks " +
                   std::to_string(scenario_.max_ticks),
               injection_spans_[i]);
      }
    }
    if (scenario_.time_machine) {
      const long long span =
          static_cast<long long>(scenario_.time_machine->period) *
          scenario_.time_machine->slice_count;
      if (span > scenario_.max_ticks) {
        report("P-RANGE",
               "slice_count x period exceeds max_ticks " +
                   std::to_string(scenario_.max_ticks),
               time_machine_span_);
      }
    }
  }

  std::string_view file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diagnostics_;
  int error_count_ = 0;
  Scenario scenario_;
  bool saw_max_ticks_ = false;
  std::vector<SourceSpan> injection_spans_;
  SourceSpan time_machine_span_;
};

}  // namespace dsl_detail

inline ScenarioParseResult parse_scenario(std::string_view text,
                                          std::string_view filename = "<input>") {
  return dsl_detail::ScenarioParser(text, filename).run();
}

namespace dsl_detail {

inline std::string quote(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

inline void indent(std::string& out, int depth) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
}

inline void format_machine(const Machine& machine, int depth, std::string& out) {
  indent(out, depth);
  out += "machine " + machine.thing_name + " {\n";
  if (!machine.stages.empty()) {
    indent(out, depth + 1);
    out += "stages: ";
    for (std::size_t i = 0; i < machine.stages.size(); ++i) {
      if (i > 0) out += ", ";
      out += to_string(machine.stages[i]);
    }
    out += "\n";
  }
  if (machine.has_storage) {
    indent(out, depth + 1);
    out += "storage";
    if (!machine.storage_links.empty()) {
      out += ": ";
      for (std::size_t i = 0; i < machine.storage_links.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(machine.storage_links[i]);
      }
    }
    out += "\n";
  }
  indent(out, depth);
  out += "}\n";
}

inline void format_sphere(const Sphere& sphere, int depth, std::string& out) {
  indent(out, depth);
  out += "sphere " + sphere.name + " {\n";
  for (const Machine& machine : sphere.machines) {
    format_machine(machine, depth + 1, out);
  }
  for (const Sphere& sub : sphere.subspheres) {
    format_sphere(sub, depth + 1, out);
  }
  indent(out, depth);
  out += "}\n";
}

inline void collect_machine_paths(
    const Sphere& sphere, const std::string& sphere_path,
    std::vector<std::pair<std::string, const Machine*>>& out) {
  for (const Machine& machine : sphere.machines) {
    out.emplace_back(sphere_path + "." + machine.thing_name, &machine);
  }
  for (const Sphere& sub : sphere.subspheres) {
    collect_machine_paths(sub, sphere_path + "." + sub.name, out);
  }
}

// Prints a closed region compactly: machines whose whole stage set is inside
// collapse to their machine path; leftover stages print individually.
inline std::vector<std::string> region_ref_paths(const Schema& schema,
                                                 const Region& region) {
  std::vector<std::pair<std::string, const Machine*>> machines;
  for (const Sphere& root : schema.spheres) {
    collect_machine_paths(root, root.name, machines);
  }
  std::set<StageRef> leftover = region.stages;
  std::vector<std::string> paths;
  for (const auto& [path, machine] : machines) {
    if (machine->stages.empty()) continue;
    bool covered = true;
    for (StageKind kind : machine->stages) {
      const std::size_t dot = path.rfind('.');
      StageRef ref{path.substr(0, dot), path.substr(dot + 1), kind};
      if (region.stages.count(ref) == 0) covered = false;
    }
    if (!covered) continue;
    paths.push_back(path);
    const std::size_t dot = path.rfind('.');
    for (StageKind kind : machine->stages) {
      leftover.erase(StageRef{path.substr(0, dot), path.substr(dot + 1), kind});
    }
  }
  for (const StageRef& stage : leftover) paths.push_back(stage.path());
  std::sort(paths.begin(), paths.end());
  return paths;
}

inline std::string trigger_source_text(const Schema& schema,
                                       const TriggerSource& source) {
  if (const auto* stage = std::get_if<StageRef>(&source)) return stage->path();
  const int index = std::get<int>(source);
  if (index < 0 || index >= static_cast<int>(schema.flows.size())) {
    return "(?)";
  }
  const FlowArc& arc = schema.flows[static_cast<std::size_t>(index)];
  return "(" + arc.source.path() + " -> " + arc.target.path() + ")";
}

}  // namespace dsl_detail

// Canonical text for a schema: LF endings, 2-space indentation, declaration
// order preserved. Reparsing the output reconstructs a structurally equal
// schema. The empty schema formats to the empty string.
inline std::string format_schema(const Schema& schema) {
  std::string out;
  auto separate = [&out] {
    if (!out.empty()) out += "\n";
  };
  for (const Sphere& sphere : schema.spheres) {
    separate();
    dsl_detail::format_sphere(sphere, 0, out);
  }
  if (!schema.flows.empty()) {
    separate();
    for (const FlowArc& arc : schema.flows) {
      out += "flow " + arc.source.path() + " -> " + arc.target.path() + "\n";
    }
  }
  if (!schema.triggers.empty()) {
    separate();
    for (const TriggerArc& trigger : schema.triggers) {
      out += "trigger " + dsl_detail::trigger_source_text(schema, trigger.source) +
             " ~> " + trigger.target.path() + "\n";
    }
  }
  for (const EventDef& event : schema.events) {
    separate();
    out += "event " + event.name;
    if (!event.label.empty()) out += " " + dsl_detail::quote(event.label);
    out += " {\n";
    const std::vector<std::string> refs =
        dsl_detail::region_ref_paths(schema, event.region);
    out += "  region: ";
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (i > 0) out += ", ";
      out += refs[i];
    }
    out += "\n";
    if (event.duration != 1) {
      out += "  duration " + std::to_string(event.duration) + "\n";
    }
    if (!event.property_labels.empty()) {
      out += "  property ";
      std::size_t i = 0;
      for (const std::string& label : event.property_labels) {
        if (i++ > 0) out += ", ";
        out += label;
      }
      out += "\n";
    }
    out += "}\n";
  }
  if (!schema.declared_traces.empty()) {
    separate();
    for (const DeclaredTrace& trace : schema.declared_traces) {
      out += "trace " + trace.name + ":";
      for (std::size_t i = 0; i < trace.events.size(); ++i) {
        out += i == 0 ? " " : ", ";
        out += trace.events[i];
      }
      out += "\n";
    }
  }
  return out;
}

}  // namespace fm
