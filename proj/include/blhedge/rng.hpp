#pragma once

#include <cstdint>

#include "blhedge/gaussian.hpp"

namespace blhedge {

// Counter-based RNG (Philox4x32-10). A draw is addressed by
// (seed, chunk, index): the same triple always yields the same value, no
// matter how work is divided across threads. Sampling code partitions its
// index range into fixed-size chunks so results are reproducible bit-for-bit
// for any thread count.
constexpr std::int64_t kRngChunk = 4096;

namespace detail {

struct PhiloxBlock {
    std::uint32_t v[4];
};

inline PhiloxBlock philox4x32(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo) {
    std::uint32_t c0 = (std::uint32_t)(ctr_lo & 0xffffffffu);
    std::uint32_t c1 = (std::uint32_t)(ctr_lo >> 32);
    std::uint32_t c2 = (std::uint32_t)(ctr_hi & 0xffffffffu);
    std::uint32_t c3 = (std::uint32_t)(ctr_hi >> 32);
    std::uint32_t k0 = (std::uint32_t)(key & 0xffffffffu);
    std::uint32_t k1 = (std::uint32_t)(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = 0xD2511F53ull * c0;
        const std::uint64_t p1 = 0xCD9E8D57ull * c2;
        const std::uint32_t hi0 = (std::uint32_t)(p0 >> 32), lo0 = (std::uint32_t)p0;
        const std::uint32_t hi1 = (std::uint32_t)(p1 >> 32), lo1 = (std::uint32_t)p1;
        const std::uint32_t n0 = hi1 ^ c1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ c3 ^ k1;
        const std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return PhiloxBlock{{c0, c1, c2, c3}};
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t)hi << 32) | lo;
    return ((double)(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

// Stream of iid draws addressed by index within one (seed, chunk) pair.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t chunk = 0;

    double uniform(std::uint64_t index) const {
        const auto b = detail::philox4x32(seed, chunk, index >> 1);
        if (index & 1) return detail::to_unit(b.v[2], b.v[3]);
        return detail::to_unit(b.v[0], b.v[1]);
    }
    double normal(std::uint64_t index) const { return norm_inv(uniform(index)); }
};

// Draw addressing inside a chunk: (row local to the chunk, offset within the
// row). Keeping the row stride fixed means extending a path with extra steps
// reuses exactly the same draws for the shared prefix.
inline std::uint64_t draw_index(std::int64_t local_row, std::int64_t offset) {
    return ((std::uint64_t)local_row << 24) | (std::uint64_t)offset;
}

}  // namespace blhedge
