#include "raf/rng.hpp"

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace raf {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))), engine_(key_) {}

double Rng::normal() { return boost::random::normal_distribution<double>()(engine_); }

double Rng::uniform() { return boost::random::uniform_01<double>()(engine_); }

bool Rng::bernoulli(double p) { return boost::random::bernoulli_distribution<double>(p)(engine_); }

double Rng::rademacher() { return bernoulli(0.5) ? 1.0 : -1.0; }

Rng Rng::split(std::uint64_t stream) const { return Rng(key_, stream); }

}  // namespace raf
