// Shared kernel bodies, instantiated once per lane policy.  Everything here
// is straight-line IEEE double arithmetic through the Lane interface; see
// lane.hpp for why that yields bit-identical backends.
//
// This file is included by kernels_scalar.cpp and kernels_avx2.cpp only.

namespace sigmar::kernels::body {

// ((u >> 12) + 0.5) * 2^-52.  The shifted value fits in 52 bits, so the +0.5
// and the scaling are exact; the result lies in [2^-53, 1 - 2^-53].
template <class L>
inline typename L::D to_unit_lane(typename L::I u) {
    typename L::D v = L::u52_to_double(L::template srl<12>(u));
    return L::mul(L::add(v, L::set1(0.5)), L::set1(0x1p-52));
}

// Natural log of a positive normal double.  Reduction: x = m * 2^e with
// m in (sqrt(1/2), sqrt(2)], then atanh series in z = (m-1)/(m+1).  m-1 is
// exact (Sterbenz), |z| <= 0.1716, and the series through z^19 leaves a
// relative truncation error below 3e-17.
template <class L>
inline typename L::D log_core(typename L::D x) {
    using D = typename L::D;
    using I = typename L::I;

    const I bits = L::to_bits(x);
    const I mant_mask = L::set1i(0x000FFFFFFFFFFFFFULL);
    const I one_exp = L::set1i(0x3FF0000000000000ULL);

    D e = L::sub(L::u52_to_double(L::template srl<52>(bits)), L::set1(1023.0));
    D m = L::from_bits(L::or_i(L::and_i(bits, mant_mask), one_exp));

    // Re-center m around 1 so z stays small on both sides.
    typename L::M high = L::gt(m, L::set1(1.4142135623730951));
    m = L::select(high, L::mul(m, L::set1(0.5)), m);
    e = L::add(e, L::select(high, L::set1(1.0), L::set1(0.0)));

    D z = L::div(L::sub(m, L::set1(1.0)), L::add(m, L::set1(1.0)));
    D w = L::mul(z, z);

    D p = L::set1(1.0 / 19.0);
    p = L::fma(p, w, L::set1(1.0 / 17.0));
    p = L::fma(p, w, L::set1(1.0 / 15.0));
    p = L::fma(p, w, L::set1(1.0 / 13.0));
    p = L::fma(p, w, L::set1(1.0 / 11.0));
    p = L::fma(p, w, L::set1(1.0 / 9.0));
    p = L::fma(p, w, L::set1(1.0 / 7.0));
    p = L::fma(p, w, L::set1(1.0 / 5.0));
    p = L::fma(p, w, L::set1(1.0 / 3.0));

    D s = L::mul(z, L::set1(2.0));
    D lnm = L::fma(L::mul(s, w), p, s);

    // e*ln2 in split precision; e*ln2_hi is exact because ln2_hi carries 21
    // trailing zero bits and |e| < 2^11.
    const D ln2_hi = L::set1(6.93147180369123816490e-01);
    const D ln2_lo = L::set1(1.90821492927058770002e-10);
    return L::fma(e, ln2_hi, L::fma(e, ln2_lo, lnm));
}

// cos(2*pi*u) and sin(2*pi*u) for u in (0,1).  q = 4u is exact, k = rne(q)
// picks the quadrant, f = q - k is exact (Sterbenz case-check over k), and
// the Taylor cores run on |theta| <= pi/4.
template <class L>
inline void sincos_core(typename L::D u, typename L::D& cos_out,
                        typename L::D& sin_out) {
    using D = typename L::D;
    using I = typename L::I;

    D q = L::mul(u, L::set1(4.0));
    D k = L::round_ne(q);
    D f = L::sub(q, k);

    // Low two bits of the small integer k, read out of the mantissa of
    // k + 2^52 (exact for 0 <= k < 2^52).
    I kb = L::and_i(L::to_bits(L::add(k, L::set1(0x1p52))), L::set1i(3));
    typename L::M b0 = L::eq_i(L::and_i(kb, L::set1i(1)), L::set1i(1));
    typename L::M b1 = L::eq_i(L::and_i(kb, L::set1i(2)), L::set1i(2));

    D theta = L::mul(f, L::set1(1.5707963267948966));
    D w = L::mul(theta, theta);

    D sp = L::set1(1.0 / 355687428096000.0);          // 1/17!
    sp = L::fma(sp, w, L::set1(-1.0 / 1307674368000.0));  // -1/15!
    sp = L::fma(sp, w, L::set1(1.0 / 6227020800.0));      // 1/13!
    sp = L::fma(sp, w, L::set1(-1.0 / 39916800.0));       // -1/11!
    sp = L::fma(sp, w, L::set1(1.0 / 362880.0));          // 1/9!
    sp = L::fma(sp, w, L::set1(-1.0 / 5040.0));           // -1/7!
    sp = L::fma(sp, w, L::set1(1.0 / 120.0));             // 1/5!
    sp = L::fma(sp, w, L::set1(-1.0 / 6.0));              // -1/3!
    D sinv = L::fma(L::mul(theta, w), sp, theta);

    D cp = L::set1(1.0 / 20922789888000.0);           // 1/16!
    cp = L::fma(cp, w, L::set1(-1.0 / 87178291200.0));    // -1/14!
    cp = L::fma(cp, w, L::set1(1.0 / 479001600.0));       // 1/12!
    cp = L::fma(cp, w, L::set1(-1.0 / 3628800.0));        // -1/10!
    cp = L::fma(cp, w, L::set1(1.0 / 40320.0));           // 1/8!
    cp = L::fma(cp, w, L::set1(-1.0 / 720.0));            // -1/6!
    cp = L::fma(cp, w, L::set1(1.0 / 24.0));              // 1/4!
    cp = L::fma(cp, w, L::set1(-0.5));                    // -1/2!
    D cosv = L::fma(cp, w, L::set1(1.0));

    // Quadrant map: odd k swaps the pair; signs follow the usual wheel.
    D cos_sel = L::select(b0, sinv, cosv);
    D sin_sel = L::select(b0, cosv, sinv);
    cos_out = L::flip_sign_if(L::xor_m(b0, b1), cos_sel);
    sin_out = L::flip_sign_if(b1, sin_sel);
}

// Box-Muller on one block's pair of 64-bit words.
template <class L>
inline void gauss_from_u64(typename L::I ua, typename L::I ub,
                           typename L::D& g0, typename L::D& g1) {
    using D = typename L::D;
    D u1 = to_unit_lane<L>(ua);
    D u2 = to_unit_lane<L>(ub);
    D r = L::sqrt(L::mul(L::set1(-2.0), log_core<L>(u1)));
    D c, s;
    sincos_core<L>(u2, c, s);
    g0 = L::mul(r, c);
    g1 = L::mul(r, s);
}

// sgn(x) with sgn(0) = 0, as a double.
template <class L>
inline typename L::D sgn0(typename L::D x) {
    using D = typename L::D;
    D zero = L::set1(0.0);
    D pos = L::select(L::gt(x, zero), L::set1(1.0), zero);
    return L::select(L::gt(zero, x), L::set1(-1.0), pos);
}

// One step term of the symmetric discrete Tanaka identity.
template <class L>
inline typename L::D tanaka_term(typename L::D x0, typename L::D x1) {
    using D = typename L::D;
    D d = L::sub(L::abs(x1), L::abs(x0));
    return L::sub(d, L::mul(sgn0<L>(x0), L::sub(x1, x0)));
}

}  // namespace sigmar::kernels::body
