#pragma once

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>

namespace raf {

// Independent streams keyed by (seed, stream). The engine and the distributions come
// from Boost.Random, whose algorithms are fixed across platforms.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    double normal();
    double uniform();  // [0, 1)
    bool bernoulli(double p);
    double rademacher();

    Rng split(std::uint64_t stream) const;

private:
    std::uint64_t key_;
    boost::random::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace raf
