#include "holder/random.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace holder {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void fill_standard_normals(std::uint64_t seed, double* out, std::size_t n) {
  boost::random::mt19937_64 engine(splitmix64(seed));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) out[i] = normal(engine);
}

std::vector<double> standard_normals(std::uint64_t seed, std::size_t n) {
  std::vector<double> z(n);
  fill_standard_normals(seed, z.data(), n);
  return z;
}

}  // namespace holder
