/*
 * Copyright 2026 The cxrprep Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cxrprep/hash.hpp"

#include <array>
#include <cstdio>
#include <fstream>

#include "cxrprep/error.hpp"

namespace cxrprep {

namespace {
constexpr std::uint64_t kPrime = 0x100000001b3ULL;
}  // namespace

void Fnv1a64::update(std::span<const std::uint8_t> bytes) {
  for (std::uint8_t b : bytes) {
    state_ ^= b;
    state_ *= kPrime;
  }
}

void Fnv1a64::update(std::string_view text) {
  for (char c : text) {
    state_ ^= static_cast<std::uint8_t>(c);
    state_ *= kPrime;
  }
}

std::string Fnv1a64::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string fnv1a64_hex(std::string_view text) {
  Fnv1a64 h;
  h.update(text);
  return h.hex();
}

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  Fnv1a64 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    const auto n = static_cast<std::size_t>(in.gcount());
    h.update(std::string_view(buf.data(), n));
  }
  return h.hex();
}

}  // namespace cxrprep
