// Copyright 2026 The Entfix Authors.
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

// Run configuration echoing: config fingerprints and a machine description
// for benchmark reports.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include <sys/utsname.h>

namespace entfix {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hex FNV-1a of the compact JSON dump. nlohmann::json objects keep keys
/// sorted, so equal configs always give equal fingerprints.
inline std::string config_fingerprint(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

inline nlohmann::json machine_fingerprint() {
  nlohmann::json m;
  struct utsname u {};
  if (uname(&u) == 0) {
    m["system"] = u.sysname;
    m["release"] = u.release;
    m["machine"] = u.machine;
    m["node"] = u.nodename;
  }
  m["hardware_threads"] = std::thread::hardware_concurrency();
#if defined(__clang__)
  m["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  m["compiler"] = std::string("gcc ") + __VERSION__;
#endif
#ifdef NDEBUG
  m["build"] = "release";
#else
  m["build"] = "debug";
#endif
  return m;
}

}  // namespace entfix
