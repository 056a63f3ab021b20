/*
 * Copyright 2026 The secagg-dp Authors
 *
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

#ifndef SECAGG_DIGEST_HPP_
#define SECAGG_DIGEST_HPP_

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "secagg/error.hpp"

namespace secagg {

inline std::string to_hex(const unsigned char* data, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(kDigits[data[i] >> 4]);
    out.push_back(kDigits[data[i] & 0xf]);
  }
  return out;
}

// SHA-256 over the little-endian encoding of `words`.
inline std::string sha256_hex(const std::vector<std::uint64_t>& words) {
  std::vector<unsigned char> bytes;
  bytes.reserve(8 * words.size());
  for (auto w : words) {
    for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<unsigned char>(w >> (8 * b)));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    fail(ErrorCode::kInvalidParams, "SHA-256 unavailable");
  }
  return to_hex(md.data(), len);
}

}  // namespace secagg

#endif  // SECAGG_DIGEST_HPP_
