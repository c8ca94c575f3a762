#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace mixlab {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based substream derivation.
///
/// The engine for substream `stream` of master seed `seed` is seeded with
/// splitmix64(splitmix64(seed) ^ splitmix64(stream + 1)). Work is split into
/// fixed-size chunks, chunk i always draws from substream i, so results do
/// not depend on how chunks are assigned to worker threads.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 1));
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(derive_seed(seed, stream));
}

// Tags separating the independent random inputs of one experiment.
namespace stream_tag {
inline constexpr std::uint64_t data = 0x6461746100000000ULL;
inline constexpr std::uint64_t noise = 0x6e6f697365000000ULL;
inline constexpr std::uint64_t envelope = 0x656e760000000000ULL;
inline constexpr std::uint64_t stationary = 0x7069000000000000ULL;
inline constexpr std::uint64_t quantile = 0x7175616e74000000ULL;
}  // namespace stream_tag

/// Number of samples drawn from one substream.
inline constexpr std::size_t kChunkSize = 4096;

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace mixlab
