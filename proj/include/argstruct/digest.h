/* Copyright 2026 The ArgStruct Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Content digests and the tool version recorded in output manifests.

#ifndef ARGSTRUCT_DIGEST_H_
#define ARGSTRUCT_DIGEST_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace argstruct {

inline constexpr const char *kToolVersion = "1.0.0";

// 64-bit FNV-1a.
inline uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

// 16 lowercase hex digits.
std::string HexDigest(uint64_t value);

// Digest of a file's bytes. Throws Error if it cannot be read.
std::string FileDigest(const std::string &path);

}  // namespace argstruct

#endif  // ARGSTRUCT_DIGEST_H_
