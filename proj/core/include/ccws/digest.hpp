#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace ccws {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::span<const std::uint8_t> bytes);
Digest sha256(std::string_view text);

/// Lowercase hex, 64 characters.
std::string to_hex(const Digest& digest);
/// Throws ParseError on anything other than 64 hex characters.
Digest digest_from_hex(std::string_view hex);

}  // namespace ccws
