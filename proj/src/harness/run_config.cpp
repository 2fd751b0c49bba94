#include "navrl/harness/run_config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "navrl/common.hpp"

namespace navrl::harness {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

int64_t parse_int(const std::string& key, const std::string& value) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    fail_config("config key '" + key + "': expected integer, got '" + value + "'");
  return out;
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    fail_config("config key '" + key + "': expected unsigned integer, got '" +
                value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size())
    fail_config("config key '" + key + "': expected number, got '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail_config("config key '" + key + "': expected true/false, got '" + value +
              "'");
}

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                               std::chars_format::general);
  check(ec == std::errc(), "format_double: conversion failed");
  return std::string(buf, p);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.find('.') != std::string::npos) {
    overrides[key] = value;
    return;
  }
  if (key == "algo")
    algo = value;
  else if (key == "stage")
    stage = static_cast<int>(parse_int(key, value));
  else if (key == "beams")
    n_beams = static_cast<int>(parse_int(key, value));
  else if (key == "episodes")
    episodes = static_cast<int>(parse_int(key, value));
  else if (key == "eval_episodes")
    eval_episodes = static_cast<int>(parse_int(key, value));
  else if (key == "eval_every")
    eval_every = static_cast<int>(parse_int(key, value));
  else if (key == "early_stop_success")
    early_stop_success = parse_double(key, value);
  else if (key == "seed")
    seed = parse_u64(key, value);
  else if (key == "init_from")
    init_from = value;
  else if (key == "train_ratio")
    train_ratio = parse_double(key, value);
  else if (key == "out")
    out_dir = value;
  else if (key == "stages_dir")
    stages_dir = value;
  else if (key == "realtime")
    realtime = parse_bool(key, value);
  else
    fail_config("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  if (algo != "dreamer" && algo != "sac" && algo != "ddpg" && algo != "td3")
    fail_config("algo must be one of dreamer/sac/ddpg/td3, got '" + algo + "'");
  if (stage < 1 || stage > 6)
    fail_config("stage must be in 1..6, got " + std::to_string(stage));
  if (n_beams < 1) fail_config("beams must be >= 1");
  if (episodes < 1) fail_config("episodes must be >= 1");
  if (eval_episodes < 1) fail_config("eval_episodes must be >= 1");
  if (eval_every < 0) fail_config("eval_every must be >= 0");
  if (early_stop_success < 0.0 || early_stop_success > 1.0)
    fail_config("early_stop_success must be in [0, 1]");
  if (!(train_ratio > 0.0)) fail_config("train_ratio must be positive");
  if (out_dir.empty()) fail_config("output directory must not be empty");
  if (!std::filesystem::exists(stage_path()))
    fail_config("stage file not found: " + stage_path());
}

std::string RunConfig::stage_path() const {
  return stages_dir + "/stage" + std::to_string(stage) + ".json";
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "algo = " << algo << "\n";
  os << "stage = " << stage << "\n";
  os << "beams = " << n_beams << "\n";
  os << "episodes = " << episodes << "\n";
  os << "eval_episodes = " << eval_episodes << "\n";
  os << "eval_every = " << eval_every << "\n";
  os << "early_stop_success = " << format_double(early_stop_success) << "\n";
  os << "seed = " << seed << "\n";
  os << "init_from = " << init_from << "\n";
  os << "train_ratio = " << format_double(train_ratio) << "\n";
  os << "out = " << out_dir << "\n";
  os << "stages_dir = " << stages_dir << "\n";
  os << "realtime = " << (realtime ? "true" : "false") << "\n";
  for (const auto& [k, v] : overrides) os << k << " = " << v << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> parse_kv_text(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail_config(origin + ":" + std::to_string(lineno) +
                  ": expected 'key = value', got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      fail_config(origin + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

void apply_kv_text(RunConfig& rc, const std::string& text,
                   const std::string& origin) {
  for (const auto& [k, v] : parse_kv_text(text, origin)) rc.set(k, v);
}

void apply_kv_file(RunConfig& rc, const std::string& path) {
  apply_kv_text(rc, read_text_file(path), path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_config("cannot open file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("cannot write file: " + path);
  f << text;
  if (!f) fail("short write: " + path);
}

}  // namespace navrl::harness
