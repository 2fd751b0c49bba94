#include "navrl/harness/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

#include "navrl/common.hpp"

namespace navrl::harness {

using nlohmann::json;

namespace {

// Everything on disk is little-endian; the byte shuffles below make that hold
// on any host.
void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& in, size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<uint32_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  return v;
}

void put_f64(std::string& out, double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, 8);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const std::string& in, size_t off) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<uint64_t>(static_cast<unsigned char>(in[off + i]))
            << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

std::string encode(const CheckpointMeta& meta,
                   const std::vector<std::pair<std::string, diff::Tensor>>& tensors) {
  json manifest;
  manifest["schema"] = meta.schema;
  manifest["dtype"] = "f64";
  manifest["algo"] = meta.algo;
  manifest["beams"] = meta.n_beams;
  manifest["stage"] = meta.stage;
  manifest["extra"] = meta.extra;
  json list = json::array();
  for (const auto& [name, t] : tensors)
    list.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols}});
  manifest["tensors"] = std::move(list);
  std::string mtext = manifest.dump();

  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(out, static_cast<uint32_t>(mtext.size()));
  out += mtext;
  for (const auto& [name, t] : tensors)
    for (double x : t.v) put_f64(out, x);
  return out;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("checkpoint: cannot open " + path + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail("checkpoint: short write to " + path);
}

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const diff::ParamStore& ps, const std::vector<int>& ids) {
  std::vector<std::pair<std::string, diff::Tensor>> tensors;
  tensors.reserve(ids.size());
  for (int id : ids) tensors.emplace_back(ps.name(id), ps.value(id));
  save_checkpoint(path, Checkpoint{meta, std::move(tensors)});
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  write_file(path, encode(ck.meta, ck.tensors));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_config("checkpoint: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());

  const size_t header = sizeof(kCheckpointMagic) + 4;
  if (bytes.size() < header)
    fail_config("checkpoint " + path + ": truncated header");
  if (std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)))
    fail_config("checkpoint " + path + ": bad magic, not a checkpoint file");
  size_t mlen = get_u32(bytes, sizeof(kCheckpointMagic));
  if (bytes.size() < header + mlen)
    fail_config("checkpoint " + path + ": truncated manifest");

  json manifest;
  try {
    manifest = json::parse(bytes.substr(header, mlen));
  } catch (const json::exception& e) {
    fail_config("checkpoint " + path + ": manifest is not valid JSON (" +
                e.what() + ")");
  }

  Checkpoint ck;
  try {
    ck.meta.schema = manifest.at("schema").get<int>();
    if (ck.meta.schema != kCheckpointSchema)
      fail_config("checkpoint " + path + ": schema version " +
                  std::to_string(ck.meta.schema) + ", this build reads " +
                  std::to_string(kCheckpointSchema));
    std::string dtype = manifest.at("dtype").get<std::string>();
    if (dtype != "f64")
      fail_config("checkpoint " + path + ": unsupported dtype '" + dtype + "'");
    ck.meta.algo = manifest.at("algo").get<std::string>();
    ck.meta.n_beams = manifest.at("beams").get<int>();
    ck.meta.stage = manifest.at("stage").get<int>();
    ck.meta.extra =
        manifest.at("extra").get<std::map<std::string, std::string>>();

    size_t off = header + mlen;
    for (const auto& entry : manifest.at("tensors")) {
      std::string name = entry.at("name").get<std::string>();
      int rows = entry.at("rows").get<int>();
      int cols = entry.at("cols").get<int>();
      if (rows < 0 || cols < 0)
        fail_config("checkpoint " + path + ": negative shape for " + name);
      size_t n = static_cast<size_t>(rows) * static_cast<size_t>(cols);
      if (bytes.size() < off + 8 * n)
        fail_config("checkpoint " + path + ": truncated payload at " + name);
      diff::Tensor t(rows, cols);
      for (size_t i = 0; i < n; ++i) t.v[i] = get_f64(bytes, off + 8 * i);
      off += 8 * n;
      ck.tensors.emplace_back(std::move(name), std::move(t));
    }
    if (off != bytes.size())
      fail_config("checkpoint " + path + ": " +
                  std::to_string(bytes.size() - off) +
                  " unexpected trailing bytes");
  } catch (const json::exception& e) {
    fail_config("checkpoint " + path + ": malformed manifest (" + e.what() +
                ")");
  }
  return ck;
}

void restore_into(const Checkpoint& ck, diff::ParamStore& ps) {
  for (const auto& [name, t] : ck.tensors) {
    int id = ps.find(name);
    if (id < 0)
      fail_config("checkpoint restore: no parameter named '" + name +
                  "' in this model");
    const diff::Tensor& dst = ps.value(id);
    if (dst.rows != t.rows || dst.cols != t.cols)
      fail_config("checkpoint restore: shape mismatch for '" + name +
                  "': stored " + std::to_string(t.rows) + "x" +
                  std::to_string(t.cols) + ", model has " +
                  std::to_string(dst.rows) + "x" + std::to_string(dst.cols));
  }
  for (const auto& [name, t] : ck.tensors) ps.value(ps.find(name)) = t;
}

}  // namespace navrl::harness
