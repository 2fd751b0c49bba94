#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace navrl::harness {

// One experiment: which algorithm, which arena, how long, where to write.
// Dotted keys (mf.batch, wm.enc_width, agent.horizon, dreamer.seq_len,
// env.d_goal) pass through `overrides` into the component configs.
struct RunConfig {
  std::string algo = "dreamer";  // dreamer | sac | ddpg | td3
  int stage = 1;                 // 1..6
  int n_beams = 10;              // paper uses 10 and 360
  int episodes = 5000;
  int eval_episodes = 100;
  int eval_every = 0;  // 0 = no periodic evaluation during training
  double early_stop_success = 0.0;  // stop once a periodic eval reaches this
  uint64_t seed = 0;
  std::string init_from;  // optional checkpoint to warm-start from
  double train_ratio = 1.0;  // learner updates per env step (dreamer)
  std::string out_dir = "runs/out";
  std::string stages_dir = "stages";
  bool realtime = false;
  std::map<std::string, std::string> overrides;

  void set(const std::string& key, const std::string& value);
  void validate() const;  // throws ConfigError
  std::string stage_path() const;
  std::string to_text() const;  // resolved key=value snapshot
};

// key = value lines; '#' comments and blank lines ignored.
std::vector<std::pair<std::string, std::string>> parse_kv_text(
    const std::string& text, const std::string& origin);
void apply_kv_text(RunConfig& rc, const std::string& text,
                   const std::string& origin);
void apply_kv_file(RunConfig& rc, const std::string& path);

// Strict scalar parsing: the whole token must consume, errors name the key.
int64_t parse_int(const std::string& key, const std::string& value);
uint64_t parse_u64(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Shortest round-trip decimal form (std::to_chars general).
std::string format_double(double x);

}  // namespace navrl::harness
