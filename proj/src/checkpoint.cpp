#include "gcfc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <vector>

#include "gcfc/errors.hpp"

namespace gcfc {

namespace {

constexpr char kMagic[5] = {'G', 'C', 'F', 'C', '1'};

void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f64_le(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

struct RawCheckpoint {
  nlohmann::json manifest;
  std::vector<unsigned char> blob;
};

RawCheckpoint read_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 9 || std::memcmp(bytes.data(), kMagic, 5) != 0)
    throw IoError("checkpoint: '" + path + "' is not a GCFC1 checkpoint");
  std::uint32_t mlen = get_u32_le(bytes.data() + 5);
  if (9 + static_cast<std::size_t>(mlen) > bytes.size())
    throw IoError("checkpoint: '" + path + "' is truncated (manifest)");
  RawCheckpoint raw;
  try {
    raw.manifest = nlohmann::json::parse(bytes.begin() + 9, bytes.begin() + 9 + mlen);
  } catch (const std::exception& e) {
    throw IoError("checkpoint: '" + path + "' has a corrupt manifest: " + e.what());
  }
  raw.blob.assign(bytes.begin() + 9 + mlen, bytes.end());
  return raw;
}

}  // namespace

void save_checkpoint(const std::string& path, const nlohmann::json& config,
                     const ParamStore& params) {
  nlohmann::json manifest;
  manifest["config"] = config;
  manifest["params"] = nlohmann::json::array();
  std::string blob;
  for (const auto& [name, v] : params.items()) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["shape"] = v->shape;
    entry["offset"] = blob.size();
    manifest["params"].push_back(entry);
    for (double x : v->data) put_f64_le(blob, x);
  }
  std::string mtext = manifest.dump();
  std::string out;
  out.append(kMagic, 5);
  put_u32_le(out, static_cast<std::uint32_t>(mtext.size()));
  out += mtext;
  out += blob;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("checkpoint: short write to '" + path + "'");
}

void load_checkpoint(const std::string& path, ParamStore& params) {
  RawCheckpoint raw = read_raw(path);
  if (!raw.manifest.contains("params") || !raw.manifest["params"].is_array())
    throw IoError("checkpoint: '" + path + "' manifest lacks a params array");
  std::set<std::string> seen;
  for (const auto& entry : raw.manifest["params"]) {
    std::string name = entry.at("name").get<std::string>();
    Shape shape = entry.at("shape").get<Shape>();
    std::size_t offset = entry.at("offset").get<std::size_t>();
    if (!params.has(name))
      throw ValidationError("checkpoint: stored tensor '" + name +
                            "' does not exist in the current model");
    ValuePtr v = params.get(name);
    if (v->shape != shape) {
      auto fmt = [](const Shape& s) {
        std::string t = "(";
        for (std::size_t i = 0; i < s.size(); ++i)
          t += (i ? "," : "") + std::to_string(s[i]);
        return t + ")";
      };
      throw ValidationError("checkpoint: tensor '" + name + "' has shape " + fmt(shape) +
                            " in the file but " + fmt(v->shape) + " in the model");
    }
    std::size_t need = offset + 8 * v->data.size();
    if (need > raw.blob.size())
      throw IoError("checkpoint: '" + path + "' is truncated (blob)");
    for (std::size_t i = 0; i < v->data.size(); ++i)
      v->data[i] = get_f64_le(raw.blob.data() + offset + 8 * i);
    seen.insert(name);
  }
  for (const auto& [name, v] : params.items()) {
    (void)v;
    if (!seen.count(name))
      throw ValidationError("checkpoint: model tensor '" + name +
                            "' is missing from the file");
  }
}

nlohmann::json read_checkpoint_config(const std::string& path) {
  RawCheckpoint raw = read_raw(path);
  if (!raw.manifest.contains("config"))
    throw IoError("checkpoint: '" + path + "' manifest lacks a config object");
  return raw.manifest["config"];
}

}  // namespace gcfc
