#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "fm/dsl.hpp"
#include "fm/validate.hpp"

namespace fmtest {

inline std::string corpus_path(const std::string& name) {
  return std::string(FM_CORPUS_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline fm::Schema parse_ok(const std::string& text,
                           const std::string& name = "<test>") {
  fm::ParseResult result = fm::parse_schema(text, name);
  if (!result.ok()) {
    std::string message = "parse failed:";
    for (const auto& d : result.diagnostics) {
      message += "\n  " + std::to_string(d.span.line) + ":" +
                 std::to_string(d.span.column) + " [" + d.code + "] " + d.message;
    }
    throw std::runtime_error(message);
  }
  return *std::move(result.schema);
}

inline fm::Schema load_corpus(const std::string& name) {
  fm::Schema schema = parse_ok(read_file(corpus_path(name)), name);
  const std::size_t dot = name.find_last_of('.');
  schema.name = dot == std::string::npos ? name : name.substr(0, dot);
  return schema;
}

inline fm::Scenario load_scenario(const std::string& name) {
  fm::ScenarioParseResult result =
      fm::parse_scenario(read_file(corpus_path(name)), name);
  if (!result.ok()) throw std::runtime_error("scenario parse failed: " + name);
  fm::Scenario scenario = *std::move(result.scenario);
  const std::size_t dot = name.find_last_of('.');
  scenario.name = dot == std::string::npos ? name : name.substr(0, dot);
  return scenario;
}

}  // namespace fmtest
