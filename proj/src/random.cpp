#include "deepbarrier/random.hpp"

namespace deepbarrier {

namespace {

constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index) noexcept {
  const std::uint64_t tag = SplitMix64::mix(fnv1a(label) + 0x9E3779B97F4A7C15ULL * (index + 1));
  return SplitMix64::mix(parent ^ tag) ^ SplitMix64::mix(tag + parent * 0xD1B54A32D192ED03ULL);
}

}  // namespace deepbarrier
