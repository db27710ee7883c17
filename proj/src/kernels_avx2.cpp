#include "sigmar/kernels.hpp"
#include "sigmar/kernels/lane.hpp"
#include "sigmar/kernels/philox.hpp"
#include "sigmar/kernels/body.inl"

// AVX2 backend: Philox runs eight blocks at a time in structure-of-arrays
// form, the transcendental cores run on four-lane doubles through the shared
// bodies.  Remainders fall back to the scalar lane, which is the same code
// the scalar backend runs, so the split point never shows in the output.

#ifdef __AVX2__

#include <immintrin.h>

namespace sigmar::kernels::avx2_impl {

namespace {

struct Soa {
    __m256i c0, c1, c2, c3;
};

// 32x32 -> 64 products for all eight epi32 lanes, split into hi/lo words.
inline void mul_hi_lo(__m256i c, __m256i mult, __m256i& hi, __m256i& lo) {
    __m256i pe = _mm256_mul_epu32(c, mult);
    __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(c, 32), mult);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0xAA);
    lo = _mm256_blend_epi32(pe, _mm256_slli_epi64(po, 32), 0xAA);
}

inline Soa make_counters(std::uint64_t block0, std::uint64_t sub) {
    const std::uint32_t lo = static_cast<std::uint32_t>(block0);
    const std::uint32_t hi = static_cast<std::uint32_t>(block0 >> 32);
    const __m256i offs = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    const __m256i lov = _mm256_set1_epi32(static_cast<int>(lo));
    const __m256i sum = _mm256_add_epi32(lov, offs);
    // Unsigned wrap detection (sign-bias trick) feeds the carry into c1.
    const __m256i bias = _mm256_set1_epi32(static_cast<int>(0x80000000u));
    const __m256i carry = _mm256_cmpgt_epi32(_mm256_xor_si256(lov, bias),
                                             _mm256_xor_si256(sum, bias));
    Soa s;
    s.c0 = sum;
    s.c1 = _mm256_sub_epi32(_mm256_set1_epi32(static_cast<int>(hi)), carry);
    s.c2 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(sub)));
    s.c3 = _mm256_set1_epi32(static_cast<int>(static_cast<std::uint32_t>(sub >> 32)));
    return s;
}

inline void philox_rounds(Soa& s, std::uint32_t k0, std::uint32_t k1) {
    __m256i key0 = _mm256_set1_epi32(static_cast<int>(k0));
    __m256i key1 = _mm256_set1_epi32(static_cast<int>(k1));
    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxM1));
    const __m256i w0 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxW0));
    const __m256i w1 = _mm256_set1_epi32(static_cast<int>(detail::kPhiloxW1));
    for (int r = 0; r < 10; ++r) {
        __m256i hi0, lo0, hi1, lo1;
        mul_hi_lo(s.c0, m0, hi0, lo0);
        mul_hi_lo(s.c2, m1, hi1, lo1);
        const __m256i n0 =
            _mm256_xor_si256(_mm256_xor_si256(hi1, s.c1), key0);
        const __m256i n2 =
            _mm256_xor_si256(_mm256_xor_si256(hi0, s.c3), key1);
        s.c0 = n0;
        s.c1 = lo1;
        s.c2 = n2;
        s.c3 = lo0;
        key0 = _mm256_add_epi32(key0, w0);
        key1 = _mm256_add_epi32(key1, w1);
    }
}

// Packs epi32 SoA words (xhi << 32 | xlo per block) into u64 vectors in
// block order: v0123 holds blocks 0..3, v4567 blocks 4..7.
inline void assemble_u64(__m256i xhi, __m256i xlo, __m256i& v0123,
                         __m256i& v4567) {
    const __m256i lo = _mm256_unpacklo_epi32(xlo, xhi);  // blocks 0,1,4,5
    const __m256i hi = _mm256_unpackhi_epi32(xlo, xhi);  // blocks 2,3,6,7
    v0123 = _mm256_permute2x128_si256(lo, hi, 0x20);
    v4567 = _mm256_permute2x128_si256(lo, hi, 0x31);
}

// out[0..7] = {a0, b0, a1, b1, a2, b2, a3, b3}
inline void store_interleaved(double* out, __m256d a, __m256d b) {
    const __m256d t0 = _mm256_unpacklo_pd(a, b);
    const __m256d t1 = _mm256_unpackhi_pd(a, b);
    _mm256_storeu_pd(out, _mm256_permute2f128_pd(t0, t1, 0x20));
    _mm256_storeu_pd(out + 4, _mm256_permute2f128_pd(t0, t1, 0x31));
}

}  // namespace

bool available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out) {
    const std::uint32_t k0 = static_cast<std::uint32_t>(key);
    const std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    std::size_t j = 0;
    for (; j + 8 <= npairs; j += 8) {
        Soa s = make_counters(block0 + j, 0);
        philox_rounds(s, k0, k1);
        __m256i a03, a47, b03, b47;
        assemble_u64(s.c0, s.c1, a03, a47);
        assemble_u64(s.c2, s.c3, b03, b47);
        __m256d g0, g1;
        body::gauss_from_u64<Avx2Lane>(a03, b03, g0, g1);
        store_interleaved(out + 2 * j, g0, g1);
        body::gauss_from_u64<Avx2Lane>(a47, b47, g0, g1);
        store_interleaved(out + 2 * j + 8, g0, g1);
    }
    for (; j < npairs; ++j) {
        std::uint64_t a, b;
        detail::philox_u64s(key, block0 + j, 0, a, b);
        double g0, g1;
        body::gauss_from_u64<ScalarLane>(a, b, g0, g1);
        out[2 * j] = g0;
        out[2 * j + 1] = g1;
    }
}

void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out) {
    const std::uint32_t k0 = static_cast<std::uint32_t>(key);
    const std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    std::size_t j = 0;
    for (; j + 8 <= npairs; j += 8) {
        Soa s = make_counters(block0 + j, 0);
        philox_rounds(s, k0, k1);
        __m256i a03, a47, b03, b47;
        assemble_u64(s.c0, s.c1, a03, a47);
        assemble_u64(s.c2, s.c3, b03, b47);
        store_interleaved(out + 2 * j, body::to_unit_lane<Avx2Lane>(a03),
                          body::to_unit_lane<Avx2Lane>(b03));
        store_interleaved(out + 2 * j + 8, body::to_unit_lane<Avx2Lane>(a47),
                          body::to_unit_lane<Avx2Lane>(b47));
    }
    for (; j < npairs; ++j) {
        std::uint64_t a, b;
        detail::philox_u64s(key, block0 + j, 0, a, b);
        out[2 * j] = body::to_unit_lane<ScalarLane>(a);
        out[2 * j + 1] = body::to_unit_lane<ScalarLane>(b);
    }
}

void tanaka_terms(const double* x, std::size_t n_steps, double* out) {
    std::size_t j = 0;
    for (; j + 4 <= n_steps; j += 4) {
        const __m256d x0 = _mm256_loadu_pd(x + j);
        const __m256d x1 = _mm256_loadu_pd(x + j + 1);
        _mm256_storeu_pd(out + j, body::tanaka_term<Avx2Lane>(x0, x1));
    }
    for (; j < n_steps; ++j)
        out[j] = body::tanaka_term<ScalarLane>(x[j], x[j + 1]);
}

void squared_increments(const double* x, std::size_t n_steps, double* out) {
    std::size_t j = 0;
    for (; j + 4 <= n_steps; j += 4) {
        const __m256d d =
            _mm256_sub_pd(_mm256_loadu_pd(x + j + 1), _mm256_loadu_pd(x + j));
        _mm256_storeu_pd(out + j, _mm256_mul_pd(d, d));
    }
    for (; j < n_steps; ++j) {
        double d = x[j + 1] - x[j];
        out[j] = d * d;
    }
}

}  // namespace sigmar::kernels::avx2_impl

#else  // !__AVX2__

// Built without AVX2 support: report unavailable and defer to the scalar
// backend so the symbols still link.

namespace sigmar::kernels::avx2_impl {

bool available() { return false; }

void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out) {
    scalar_impl::fill_gaussian_pairs(key, block0, npairs, out);
}

void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out) {
    scalar_impl::fill_uniform_pairs(key, block0, npairs, out);
}

void tanaka_terms(const double* x, std::size_t n_steps, double* out) {
    scalar_impl::tanaka_terms(x, n_steps, out);
}

void squared_increments(const double* x, std::size_t n_steps, double* out) {
    scalar_impl::squared_increments(x, n_steps, out);
}

}  // namespace sigmar::kernels::avx2_impl

#endif  // __AVX2__
