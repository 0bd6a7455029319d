#pragma once

#include <cstdint>
#include <random>

#include "refldiff/grid.hpp"

namespace refl {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and up to three tags
// (timestep, window row, window column, sample index, ...). Streams derived
// this way make results independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed ^ 0x243f6a8885a308d3ull);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

    // Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen_);
    }

    template <typename Scalar>
    void fill_normal(ChannelGrid<Scalar>& g) {
        auto& a = g.array();
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = static_cast<Scalar>(normal());
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

template <typename Scalar = double>
ChannelGrid<Scalar> gaussian_grid(Eigen::Index channels, Eigen::Index h, Eigen::Index w,
                                  std::uint64_t seed) {
    ChannelGrid<Scalar> g(channels, h, w);
    RandomStream rs(seed);
    rs.fill_normal(g);
    return g;
}

}  // namespace refl
