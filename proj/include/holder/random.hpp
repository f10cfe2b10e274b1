#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace holder {

/// SplitMix64 finaliser; a bijective 64-bit mix.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the independent stream for item `index` under master `seed`.
/// Depends only on (seed, index), never on evaluation order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// n independent standard normals from the stream keyed by `seed`.
/// Boost's mt19937_64 and ziggurat normal_distribution are fully specified
/// algorithms, so the sequence is identical across platforms and compilers.
std::vector<double> standard_normals(std::uint64_t seed, std::size_t n);

/// Same, written into an existing buffer.
void fill_standard_normals(std::uint64_t seed, double* out, std::size_t n);

}  // namespace holder
