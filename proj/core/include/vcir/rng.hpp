#ifndef VCIR_RNG_HPP
#define VCIR_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace vcir {

// Philox4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so streams can be evaluated in any order on any number
// of threads and still reproduce bit-exactly.
namespace philox {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> block(std::uint64_t key, std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(0xD2511F53u, ctr[0], hi0, lo0);
        mulhilo(0xCD9E8D57u, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return ctr;
}

} // namespace philox

// Two independent U(0,1] variates from one Philox block.
inline std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const auto w = philox::block(seed, {static_cast<std::uint32_t>(counter),
                                        static_cast<std::uint32_t>(counter >> 32),
                                        static_cast<std::uint32_t>(stream),
                                        static_cast<std::uint32_t>(stream >> 32)});
    const std::uint64_t a = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    return {(static_cast<double>(a >> 11) + 1.0) * scale,
            (static_cast<double>(b >> 11) + 1.0) * scale};
}

// Standard normal draw keyed by (seed, stream, counter) via Box-Muller.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const auto u = uniform_pair(seed, stream, counter);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    return r * std::cos(6.283185307179586476925286766559 * u[1]);
}

} // namespace vcir

#endif
