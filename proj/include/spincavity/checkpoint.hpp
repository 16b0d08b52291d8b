// Copyright 2026 The spincavity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "spincavity/engine.hpp"
#include "spincavity/errors.hpp"

namespace spincavity::checkpoint {

// Self-describing binary dump of a SweepState plus run progress; little-endian
// doubles written raw, allowing bit-exact resume. Version-tagged.

inline constexpr std::uint64_t kMagic = 0x53504356434b5031ull;  // "SPCVCKP1"
inline constexpr std::uint32_t kVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::uint64_t step_index = 0;
  double max_fock_seen = 0.0;
  engine::SweepState state;
};

namespace detail {

template <typename T>
void put(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void get(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw ConfigError("checkpoint: truncated file");
}

inline void put_vec(std::ofstream& f, const VecC& v) {
  put(f, static_cast<std::uint64_t>(v.size()));
  f.write(reinterpret_cast<const char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(cd)));
}

inline VecC get_vec(std::ifstream& f) {
  std::uint64_t n = 0;
  get(f, n);
  VecC v(static_cast<long>(n));
  f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(cd)));
  if (!f) throw ConfigError("checkpoint: truncated vector");
  return v;
}

inline void put_mat(std::ofstream& f, const MatC& m) {
  put(f, static_cast<std::uint64_t>(m.rows()));
  put(f, static_cast<std::uint64_t>(m.cols()));
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(cd)));
}

inline MatC get_mat(std::ifstream& f) {
  std::uint64_t r = 0, c = 0;
  get(f, r);
  get(f, c);
  MatC m(static_cast<long>(r), static_cast<long>(c));
  f.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cd)));
  if (!f) throw ConfigError("checkpoint: truncated matrix");
  return m;
}

inline void put_stack(std::ofstream& f, const std::vector<engine::Isometry>& stack) {
  put(f, static_cast<std::uint64_t>(stack.size()));
  for (const auto& iso : stack) {
    put(f, static_cast<std::int32_t>(iso.spin));
    put(f, static_cast<std::uint8_t>(iso.dir == engine::Isometry::Dir::into_left ? 0 : 1));
    put_mat(f, iso.map);
    put_vec(f, iso.trace_vec);
  }
}

inline std::vector<engine::Isometry> get_stack(std::ifstream& f) {
  std::uint64_t n = 0;
  get(f, n);
  std::vector<engine::Isometry> stack(n);
  for (auto& iso : stack) {
    std::int32_t spin = 0;
    std::uint8_t dir = 0;
    get(f, spin);
    get(f, dir);
    iso.spin = spin;
    iso.dir = dir == 0 ? engine::Isometry::Dir::into_left : engine::Isometry::Dir::into_right;
    iso.map = get_mat(f);
    iso.trace_vec = get_vec(f);
  }
  return stack;
}

}  // namespace detail

inline void save(const std::string& path, const Checkpoint& ck) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint for writing: " + path);
  detail::put(f, kMagic);
  detail::put(f, kVersion);
  detail::put(f, ck.config_hash);
  detail::put(f, static_cast<std::uint64_t>(ck.config_text.size()));
  f.write(ck.config_text.data(), static_cast<std::streamsize>(ck.config_text.size()));
  detail::put(f, ck.step_index);
  detail::put(f, ck.max_fock_seen);
  const auto& st = ck.state;
  detail::put(f, st.time);
  detail::put(f, static_cast<std::int32_t>(st.n_spins));
  detail::put(f, static_cast<std::int64_t>(st.fock_dim));
  detail::put(f, static_cast<std::int64_t>(st.dl));
  detail::put(f, static_cast<std::int64_t>(st.dr));
  detail::put(f, static_cast<std::int64_t>(st.ds));
  detail::put(f, static_cast<std::int64_t>(st.dc));
  detail::put(f, static_cast<std::int32_t>(st.free_site));
  detail::put_vec(f, st.data);
  detail::put_stack(f, st.left_stack);
  detail::put_stack(f, st.right_stack);
  if (!f) throw ConfigError("checkpoint write failed: " + path);
}

inline Checkpoint load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint: " + path);
  std::uint64_t magic = 0;
  std::uint32_t version = 0;
  detail::get(f, magic);
  if (magic != kMagic) throw ConfigError("not a checkpoint file: " + path);
  detail::get(f, version);
  if (version != kVersion)
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  detail::get(f, ck.config_hash);
  std::uint64_t len = 0;
  detail::get(f, len);
  ck.config_text.resize(len);
  f.read(ck.config_text.data(), static_cast<std::streamsize>(len));
  detail::get(f, ck.step_index);
  detail::get(f, ck.max_fock_seen);
  auto& st = ck.state;
  detail::get(f, st.time);
  std::int32_t n = 0, free_site = 0;
  std::int64_t fock = 0, dl = 0, dr = 0, ds = 0, dc = 0;
  detail::get(f, n);
  detail::get(f, fock);
  detail::get(f, dl);
  detail::get(f, dr);
  detail::get(f, ds);
  detail::get(f, dc);
  detail::get(f, free_site);
  st.n_spins = n;
  st.fock_dim = fock;
  st.dl = dl;
  st.dr = dr;
  st.ds = ds;
  st.dc = dc;
  st.free_site = free_site;
  st.data = detail::get_vec(f);
  st.left_stack = detail::get_stack(f);
  st.right_stack = detail::get_stack(f);
  return ck;
}

}  // namespace spincavity::checkpoint
