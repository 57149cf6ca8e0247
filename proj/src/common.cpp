#include "knock/common.hpp"

#include <array>
#include <cstring>

namespace knock {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t state) {
  for (std::byte b : bytes) {
    state ^= static_cast<std::uint64_t>(b);
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t hash_vector(const Vector& v, std::uint64_t state) {
  const auto n = static_cast<std::uint64_t>(v.size());
  state = fnv1a(std::as_bytes(std::span(&n, 1)), state);
  return fnv1a(std::as_bytes(std::span(v.data(), static_cast<std::size_t>(v.size()))),
               state);
}

}  // namespace knock
