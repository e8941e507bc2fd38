#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "edgetrade/bytes.hpp"

namespace edgetrade {

// The single digest algorithm used across the repository.
inline constexpr const char* kDigestName = "sha256";

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
std::string to_hex(const Digest& d);

// Digest committed to the ledger for a computation result.
inline Digest result_digest(ByteView result) { return sha256(result); }

}  // namespace edgetrade
