#include "team/random.hpp"

namespace team {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RandomStream::derive_seed(std::uint64_t root, std::uint64_t owner, StreamKind kind) {
  return mix(mix(mix(root) ^ owner) ^ static_cast<std::uint64_t>(kind));
}

}  // namespace team
