// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include "relit/core/base64.hpp"

#include <openssl/evp.h>

#include <vector>

namespace relit {

std::string base64(std::span<const std::uint8_t> bytes) {
    std::vector<unsigned char> out(4 * ((bytes.size() + 2) / 3) + 1);
    const int n = EVP_EncodeBlock(out.data(), bytes.data(), static_cast<int>(bytes.size()));
    return std::string(reinterpret_cast<const char*>(out.data()), static_cast<std::size_t>(n));
}

}  // namespace relit
