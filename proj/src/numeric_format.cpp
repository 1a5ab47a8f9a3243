#include "vrturn/numeric_format.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "vrturn/error.hpp"

namespace vrturn {

std::string format_double(double value) {
  if (!std::isfinite(value)) fail(ErrorCode::NonFiniteInput, "cannot format non-finite value");
  if (value == 0.0) return "0";  // folds -0 into 0
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) fail(ErrorCode::Internal, "to_chars failed");
  return std::string(buf.data(), ptr);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace vrturn
