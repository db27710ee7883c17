#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

#ifdef __AVX2__
#include <immintrin.h>
#endif

// Lane policies for the shared kernel bodies in body.inl.  Each operation is
// one IEEE-754 double operation per lane on both policies (fma maps to a
// fused multiply-add on both sides, sqrt and the ring ops are correctly
// rounded), which is what makes the scalar and AVX2 backends bit-identical.
// The scalar translation unit is compiled with -ffp-contract=off so the
// compiler cannot fuse the explicit mul/add pairs that AVX2 leaves split.

namespace sigmar::kernels {

struct ScalarLane {
    using D = double;
    using I = std::uint64_t;
    using M = bool;
    static constexpr int width = 1;

    static D set1(double v) { return v; }
    static I set1i(std::uint64_t v) { return v; }
    static D add(D a, D b) { return a + b; }
    static D sub(D a, D b) { return a - b; }
    static D mul(D a, D b) { return a * b; }
    static D div(D a, D b) { return a / b; }
    static D fma(D a, D b, D c) { return std::fma(a, b, c); }
    static D sqrt(D a) { return std::sqrt(a); }
    static D abs(D a) { return std::fabs(a); }
    static D round_ne(D a) { return std::nearbyint(a); }
    static M gt(D a, D b) { return a > b; }
    static D select(M m, D a, D b) { return m ? a : b; }
    static D flip_sign_if(M m, D a) { return m ? -a : a; }
    static M xor_m(M a, M b) { return a != b; }
    static I to_bits(D a) { return std::bit_cast<I>(a); }
    static D from_bits(I a) { return std::bit_cast<D>(a); }
    static I and_i(I a, I b) { return a & b; }
    static I or_i(I a, I b) { return a | b; }
    template <int N>
    static I srl(I a) { return a >> N; }
    static M eq_i(I a, I b) { return a == b; }
    // Exact for 0 <= v < 2^52 (the cast rounds nothing in that range).
    static D u52_to_double(I v) { return static_cast<double>(v); }
};

#ifdef __AVX2__
struct Avx2Lane {
    using D = __m256d;
    using I = __m256i;
    using M = __m256d;  // all-ones / all-zeros per lane
    static constexpr int width = 4;

    static D set1(double v) { return _mm256_set1_pd(v); }
    static I set1i(std::uint64_t v) {
        return _mm256_set1_epi64x(static_cast<long long>(v));
    }
    static D add(D a, D b) { return _mm256_add_pd(a, b); }
    static D sub(D a, D b) { return _mm256_sub_pd(a, b); }
    static D mul(D a, D b) { return _mm256_mul_pd(a, b); }
    static D div(D a, D b) { return _mm256_div_pd(a, b); }
    static D fma(D a, D b, D c) { return _mm256_fmadd_pd(a, b, c); }
    static D sqrt(D a) { return _mm256_sqrt_pd(a); }
    static D abs(D a) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), a); }
    static D round_ne(D a) {
        return _mm256_round_pd(a, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    }
    static M gt(D a, D b) { return _mm256_cmp_pd(a, b, _CMP_GT_OQ); }
    static D select(M m, D a, D b) { return _mm256_blendv_pd(b, a, m); }
    static D flip_sign_if(M m, D a) {
        return _mm256_xor_pd(a, _mm256_and_pd(m, _mm256_set1_pd(-0.0)));
    }
    static M xor_m(M a, M b) { return _mm256_xor_pd(a, b); }
    static I to_bits(D a) { return _mm256_castpd_si256(a); }
    static D from_bits(I a) { return _mm256_castsi256_pd(a); }
    static I and_i(I a, I b) { return _mm256_and_si256(a, b); }
    static I or_i(I a, I b) { return _mm256_or_si256(a, b); }
    template <int N>
    static I srl(I a) { return _mm256_srli_epi64(a, N); }
    static M eq_i(I a, I b) {
        return _mm256_castsi256_pd(_mm256_cmpeq_epi64(a, b));
    }
    // OR the 52-bit integer into the mantissa of 2^52 and subtract the
    // exponent back out; exact, and equal to the scalar cast for v < 2^52.
    static D u52_to_double(I v) {
        const I magic = set1i(0x4330000000000000ULL);  // bits of 2^52
        return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic)),
                             _mm256_set1_pd(0x1p52));
    }
};
#endif  // __AVX2__

}  // namespace sigmar::kernels
