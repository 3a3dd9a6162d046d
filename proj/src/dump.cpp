// Copyright 2026 The pscp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#include "pscp/dump.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "pscp/errors.hpp"
#include "pscp/mlp.hpp"

// The on-disk integer fields are little-endian u32; payloads are f64
// little-endian. This code assumes a little-endian host (asserted by the
// build targets: x86-64 and aarch64).

namespace pscp {

namespace {

constexpr char kMagic[4] = {'P', 'S', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), 4)) {
    throw ConfigError("dump: truncated file '" + path + "'");
  }
  return v;
}

void write_record(std::ofstream& f, const std::string& name,
                  const std::vector<std::size_t>& shape, const double* data,
                  std::size_t count) {
  write_u32(f, static_cast<std::uint32_t>(name.size()));
  f.write(name.data(), static_cast<std::streamsize>(name.size()));
  write_u32(f, static_cast<std::uint32_t>(shape.size()));
  for (std::size_t d : shape) write_u32(f, static_cast<std::uint32_t>(d));
  f.write(reinterpret_cast<const char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
}

struct Record {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;
};

bool read_record(std::ifstream& f, const std::string& path, Record& out) {
  std::uint32_t name_len = 0;
  if (!f.read(reinterpret_cast<char*>(&name_len), 4)) return false;  // EOF
  out.name.resize(name_len);
  if (!f.read(out.name.data(), name_len)) {
    throw ConfigError("dump: truncated record name in '" + path + "'");
  }
  const std::uint32_t rank = read_u32(f, path);
  if (rank > 8) throw ConfigError("dump: implausible rank in '" + path + "'");
  out.shape.resize(rank);
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    out.shape[i] = read_u32(f, path);
    count *= out.shape[i];
  }
  out.data.resize(count);
  if (!f.read(reinterpret_cast<char*>(out.data.data()),
              static_cast<std::streamsize>(count * sizeof(double)))) {
    throw ConfigError("dump: truncated payload in '" + path + "'");
  }
  return true;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("dump: cannot write '" + path + "'");
  f.write(kMagic, 4);
  std::uint32_t v = kVersion;
  f.write(reinterpret_cast<const char*>(&v), 4);
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("dump: cannot read '" + path + "'");
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ConfigError("dump: bad magic in '" + path + "'");
  }
  std::uint32_t version = 0;
  f.read(reinterpret_cast<char*>(&version), 4);
  if (version != kVersion) {
    throw ConfigError("dump: unsupported version in '" + path + "'");
  }
  return f;
}

void write_params(std::ofstream& f, const ParamSet& params) {
  for (const auto& e : params.entries()) {
    write_record(f, e.name, e.value.shape(), e.value.data(), e.value.size());
  }
}

// The expected entries are created first (via init), then each stored
// record must match an existing name and shape exactly.
void load_params(std::ifstream& f, const std::string& path, ParamSet& params) {
  std::size_t loaded = 0;
  Record rec;
  while (read_record(f, path, rec)) {
    if (!params.contains(rec.name)) {
      throw ConfigError("dump: unexpected tensor '" + rec.name + "' in '" +
                        path + "'");
    }
    Tensor& dst = params[rec.name];
    if (dst.shape() != rec.shape) {
      throw ConfigError("dump: shape mismatch for '" + rec.name + "' in '" +
                        path + "'");
    }
    std::copy(rec.data.begin(), rec.data.end(), dst.data());
    ++loaded;
  }
  if (loaded != params.size()) {
    throw ConfigError("dump: missing tensors in '" + path + "'");
  }
}

Record read_meta(std::ifstream& f, const std::string& path) {
  Record meta;
  if (!read_record(f, path, meta) || meta.name != "meta") {
    throw ConfigError("dump: missing meta record in '" + path + "'");
  }
  return meta;
}

}  // namespace

DumpKind peek_dump_kind(const std::string& path) {
  std::ifstream f = open_in(path);
  Record meta = read_meta(f, path);
  if (meta.data.empty()) throw ConfigError("dump: empty meta in '" + path + "'");
  return meta.data[0] == 0.0 ? DumpKind::kFlow : DumpKind::kVae;
}

void save_flow(const std::string& path, const FlowModel& model) {
  std::ofstream f = open_out(path);
  const double meta[6] = {0.0,
                          static_cast<double>(model.cfg.dim),
                          static_cast<double>(model.cfg.n_couplings),
                          static_cast<double>(model.cfg.hidden),
                          model.cfg.scale_offset,
                          model.cfg.s_clamp};
  write_record(f, "meta", {6}, meta, 6);
  write_params(f, model.params);
  if (!f) throw ConfigError("dump: write failed for '" + path + "'");
}

FlowModel load_flow(const std::string& path) {
  std::ifstream f = open_in(path);
  Record meta = read_meta(f, path);
  if (meta.data.size() != 6 || meta.data[0] != 0.0) {
    throw ConfigError("dump: '" + path + "' is not a flow model");
  }
  FlowConfig cfg;
  cfg.dim = static_cast<std::size_t>(meta.data[1]);
  cfg.n_couplings = static_cast<std::size_t>(meta.data[2]);
  cfg.hidden = static_cast<std::size_t>(meta.data[3]);
  cfg.scale_offset = meta.data[4];
  cfg.s_clamp = meta.data[5];
  FlowModel model = FlowModel::init(cfg, 0);
  load_params(f, path, model.params);
  return model;
}

void save_vae(const std::string& path, const VaeModel& model) {
  std::ofstream f = open_out(path);
  const double meta[4] = {1.0, static_cast<double>(model.cfg.dim),
                          static_cast<double>(model.cfg.latent),
                          static_cast<double>(model.cfg.hidden)};
  write_record(f, "meta", {4}, meta, 4);
  write_params(f, model.params);
  if (!f) throw ConfigError("dump: write failed for '" + path + "'");
}

VaeModel load_vae(const std::string& path) {
  std::ifstream f = open_in(path);
  Record meta = read_meta(f, path);
  if (meta.data.size() != 4 || meta.data[0] != 1.0) {
    throw ConfigError("dump: '" + path + "' is not a vae model");
  }
  VaeConfig cfg;
  cfg.dim = static_cast<std::size_t>(meta.data[1]);
  cfg.latent = static_cast<std::size_t>(meta.data[2]);
  cfg.hidden = static_cast<std::size_t>(meta.data[3]);
  VaeModel model = VaeModel::init(cfg, 0);
  load_params(f, path, model.params);
  return model;
}

}  // namespace pscp
