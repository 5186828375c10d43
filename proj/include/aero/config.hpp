#pragma once

// Flat key = value configuration files. '#' starts a comment; unknown keys
// are rejected. Credentials never live in the file: endpoint_api_key_env
// names the environment variable that holds the key.

#include <fstream>
#include <sstream>
#include <string>

#include "aero/core.hpp"
#include "aero/errors.hpp"
#include "aero/serde.hpp"

namespace aero {

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    int v = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key " + key + ": expected an integer, got '" + value + "'");
  }
}

inline double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw config_error("config key " + key + ": expected a number, got '" + value + "'");
  }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw config_error("config key " + key + ": expected an unsigned integer, got '" + value +
                       "'");
  }
}

}  // namespace config_detail

inline EngineConfig parse_config_text(const std::string& text) {
  using namespace config_detail;
  EngineConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    if (key == "backend") config.backend = enum_from_name<BackendKind>(value);
    else if (key == "schedule") config.schedule = enum_from_name<Schedule>(value);
    else if (key == "tasks_per_round") config.tasks_per_round = to_int(key, value);
    else if (key == "samples_per_task") config.samples_per_task = to_int(key, value);
    else if (key == "zpd_low") config.zpd_low = to_double(key, value);
    else if (key == "zpd_high") config.zpd_high = to_double(key, value);
    else if (key == "kto_beta") config.kto_beta = to_double(key, value);
    else if (key == "lambda_pos") config.lambda_pos = to_double(key, value);
    else if (key == "lambda_neg") config.lambda_neg = to_double(key, value);
    else if (key == "temperature") config.temperature = to_double(key, value);
    else if (key == "max_tokens") config.max_tokens = to_int(key, value);
    else if (key == "rounds") config.rounds = to_int(key, value);
    else if (key == "zpd_margin") config.zpd_margin = to_double(key, value);
    else if (key == "rng_seed") config.rng_seed = to_u64(key, value);
    else if (key == "retry_max_attempts") config.retry.max_attempts = to_int(key, value);
    else if (key == "retry_base_delay_ms") config.retry.base_delay_ms = to_int(key, value);
    else if (key == "retry_max_delay_ms") config.retry.max_delay_ms = to_int(key, value);
    else if (key == "retry_multiplier") config.retry.multiplier = to_double(key, value);
    else if (key == "endpoint_base_url") config.endpoint.base_url = value;
    else if (key == "endpoint_model") config.endpoint.model = value;
    else if (key == "endpoint_api_key_env") config.endpoint.api_key_env = value;
    else if (key == "endpoint_max_in_flight") config.endpoint.max_in_flight = to_int(key, value);
    else if (key == "endpoint_timeout_ms") config.endpoint.timeout_ms = to_int(key, value);
    else if (key == "endpoint_audit_log") config.endpoint.audit_log = value;
    else if (key == "synthetic_solver_skill") config.synthetic.solver_skill = to_double(key, value);
    else if (key == "synthetic_refiner_boost") config.synthetic.refiner_boost = to_double(key, value);
    else if (key == "synthetic_steepness") config.synthetic.steepness = to_double(key, value);
    else if (key == "synthetic_learning_rate") config.synthetic.learning_rate = to_double(key, value);
    else if (key == "synthetic_anchor_gain") config.synthetic.anchor_gain = to_double(key, value);
    else if (key == "synthetic_co_round_damping")
      config.synthetic.co_round_damping = to_double(key, value);
    else if (key == "synthetic_difficulty_spread")
      config.synthetic.difficulty_spread = to_double(key, value);
    else if (key == "synthetic_missing_answer_rate")
      config.synthetic.missing_answer_rate = to_double(key, value);
    else if (key == "synthetic_distractors_per_task")
      config.synthetic.distractors_per_task = to_int(key, value);
    else
      throw config_error("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  config.validate();
  return config;
}

inline EngineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace aero
