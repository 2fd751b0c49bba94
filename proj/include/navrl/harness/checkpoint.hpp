#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "navrl/diff/params.hpp"

namespace navrl::harness {

// Single-file checkpoint: 8-byte magic "NAVRLCK1", u32 little-endian manifest
// length, JSON manifest (schema, algo, beams, stage, extra config, tensor
// names + shapes), then each tensor's float64 data little-endian in manifest
// order. All validation errors are ConfigError with a reason.
inline constexpr char kCheckpointMagic[8] = {'N', 'A', 'V', 'R',
                                             'L', 'C', 'K', '1'};
inline constexpr int kCheckpointSchema = 1;

struct CheckpointMeta {
  int schema = kCheckpointSchema;
  std::string algo;
  int n_beams = 0;
  int stage = 0;
  std::map<std::string, std::string> extra;  // config overrides and notes
};

struct Checkpoint {
  CheckpointMeta meta;
  std::vector<std::pair<std::string, diff::Tensor>> tensors;
};

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const diff::ParamStore& ps, const std::vector<int>& ids);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// By-name restore; verifies every tensor exists with the stored shape before
// touching the store, so a failed restore leaves it unchanged.
void restore_into(const Checkpoint& ck, diff::ParamStore& ps);

}  // namespace navrl::harness
