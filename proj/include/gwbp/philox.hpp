#pragma once

#include <array>
#include <cstdint>

namespace gwbp {

// Philox4x32-10 counter-based generator (Salmon et al. parameters).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key);

// Maps 64 random bits to a double uniform on [0,1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Two uniforms per (seed, stream, index); the stream separates replicates.
struct UniformPair {
  double first;
  double second;
};

UniformPair philox_uniforms(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

}  // namespace gwbp
