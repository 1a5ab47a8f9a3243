#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vrturn {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// FNV-1a 64-bit hash; used for schema and config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

}  // namespace vrturn
