#pragma once

#include <cstdint>

// Scalar Philox4x32-10 core, shared by the scalar backend, the AVX2 backend's
// remainder loop, and single-draw helpers.  Reference vectors generated by
// tests/oracle/philox_oracle.py pin the exact output.

namespace sigmar::kernels::detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox4x32_10(std::uint32_t c[4], std::uint32_t k0, std::uint32_t k1) {
    for (int r = 0; r < 10; ++r) {
        std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        std::uint32_t n0 = hi1 ^ c[1] ^ k0;
        std::uint32_t n2 = hi0 ^ c[3] ^ k1;
        c[0] = n0;
        c[1] = lo1;
        c[2] = n2;
        c[3] = lo0;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
}

inline void philox_u64s(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                        std::uint64_t& a, std::uint64_t& b) {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(block),
        static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(sub),
        static_cast<std::uint32_t>(sub >> 32),
    };
    philox4x32_10(c, static_cast<std::uint32_t>(key),
                  static_cast<std::uint32_t>(key >> 32));
    a = (static_cast<std::uint64_t>(c[0]) << 32) | c[1];
    b = (static_cast<std::uint64_t>(c[2]) << 32) | c[3];
}

}  // namespace sigmar::kernels::detail
