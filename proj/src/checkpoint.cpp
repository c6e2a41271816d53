// Copyright (C) 2026 The artrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "artrec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "artrec/error.hpp"
#include "artrec/text_io.hpp"

namespace artrec {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace {

constexpr char kMagic[8] = {'A', 'R', 'T', 'R', 'E', 'C', 'K', 'P'};
constexpr std::string_view kMetaPrefix = "meta.";

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& what) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("checkpoint truncated while reading " + what);
  return value;
}

std::string get_string(std::istream& in, std::uint64_t n, const std::string& what) {
  if (n > (1ULL << 32)) throw Error("checkpoint: implausible length for " + what);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw Error("checkpoint truncated while reading " + what);
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ckpt.config.validate();
  if (!parameter_layout(ckpt.config).same_layout(ckpt.params)) {
    throw Error("save_checkpoint: parameters do not match the config");
  }
  std::string text;
  for (const auto& [k, v] : ckpt.config.to_key_values()) text += k + "=" + v + "\n";
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw Error("save_checkpoint: metadata entry '" + k + "' is not a single key=value line");
    }
    text += std::string(kMetaPrefix) + k + "=" + v + "\n";
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint64_t>(out, ckpt.params.size());
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    const auto& name = ckpt.params.names[i];
    const auto& m = ckpt.params.values[i];
    put<std::uint64_t>(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, m.cols() == 1 ? 1U : 2U);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(out, m(r, c));
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(path.string() + " is not a checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw Error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::string text = get_string(in, get<std::uint64_t>(in, "config length"), "config");
  std::map<std::string, std::string> config_kv;
  Checkpoint ckpt;
  for (const auto& [k, v] : parse_key_value_text(text, path.string())) {
    if (k.rfind(kMetaPrefix, 0) == 0) {
      ckpt.metadata[k.substr(kMetaPrefix.size())] = v;
    } else {
      config_kv[k] = v;
    }
  }
  ckpt.config = RecognizerConfig::from_key_values(config_kv);

  ModelParameters expected = parameter_layout(ckpt.config);
  const auto count = get<std::uint64_t>(in, "tensor count");
  if (count != expected.size()) {
    throw Error("checkpoint has " + std::to_string(count) + " tensors, config expects " +
                std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name = get_string(in, get<std::uint64_t>(in, "name length"), "tensor name");
    if (name != expected.names[i]) {
      throw Error("checkpoint tensor " + std::to_string(i) + " is '" + name + "', expected '" +
                  expected.names[i] + "'");
    }
    const auto ndims = get<std::uint32_t>(in, name + " ndims");
    const auto rows = get<std::uint64_t>(in, name + " rows");
    const auto cols = get<std::uint64_t>(in, name + " cols");
    auto& m = expected.values[i];
    if (ndims < 1 || ndims > 2 || rows != static_cast<std::uint64_t>(m.rows()) ||
        cols != static_cast<std::uint64_t>(m.cols())) {
      throw Error("checkpoint tensor '" + name + "' has the wrong shape");
    }
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in, name);
    if (!m.allFinite()) throw Error("checkpoint tensor '" + name + "' is not finite");
  }
  ckpt.params = std::move(expected);
  return ckpt;
}

}  // namespace artrec
