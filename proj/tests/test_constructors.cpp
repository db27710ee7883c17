#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "sigmar/balayage.hpp"
#include "sigmar/constructors.hpp"
#include "sigmar/stats.hpp"

using namespace sigmar;

namespace {

SamplePath bm(const TimeGrid& g, std::uint64_t seed, const char* role, std::uint64_t path) {
    return simulate_brownian(g, rng::Substream(seed, role, path), 0.0);
}

double sup_gap(const Decomposition& d) {
    double gap = 0.0;
    for (std::size_t j = 0; j < d.x.size(); ++j) {
        const double s = d.m.values[j] + d.v.values[j] + d.a.values[j];
        gap = std::max(gap, std::fabs(d.x.values[j] - s));
    }
    return gap;
}

double rel_sup_gap(const Decomposition& d) {
    double scale = 1.0;
    for (double v : d.x.values) scale = std::max(scale, std::fabs(v));
    return sup_gap(d) / scale;
}

// Negative-increment mass of a, as a fraction of its total variation.
double a_negative_fraction(const Decomposition& d) {
    double neg = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < d.a.size(); ++i) {
        const double da = d.a.values[i + 1] - d.a.values[i];
        total += std::fabs(da);
        if (da < 0.0) neg -= da;
    }
    return total > 0.0 ? neg / total : 0.0;
}

Decomposition scale_dec(const Decomposition& d, double c) {
    Decomposition out = d;
    for (double& v : out.x.values) v *= c;
    for (double& v : out.m.values) v *= c;
    for (double& v : out.v.values) v *= c;
    for (double& v : out.a.values) v *= c;
    return out;
}

Decomposition const_dec(const TimeGrid& g, double value) {
    Decomposition out;
    out.x = SamplePath(g, std::vector<double>(g.size(), value), "x");
    out.m = SamplePath(g, "m");
    out.v = SamplePath(g, "v");
    out.a = SamplePath(g, "a");
    out.v_carrier = SamplePath(g, std::vector<double>(g.size(), 1.0), "carrier");
    out.a_carrier = out.v_carrier;
    return out;
}

Decomposition reflected(const TimeGrid& g, std::uint64_t seed, std::uint64_t path) {
    SamplePath b = bm(g, seed, "B", path);
    return abs_of(wrap_martingale(b, b, 0.0));
}

}  // namespace

TEST_CASE("wrap_martingale views a martingale as its own decomposition") {
    TimeGrid g{64, 1.0};
    SamplePath b = bm(g, 3, "B", 0);
    Decomposition d = wrap_martingale(b, b, 0.0);
    CHECK(d.x.values == b.values);
    CHECK(d.m.values == b.values);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(d.v.values[j] == 0.0);
        CHECK(d.a.values[j] == 0.0);
    }
    CHECK(d.v_carrier.values == b.values);
    CHECK(!d.warning);

    SamplePath other(TimeGrid{32, 1.0});
    CHECK_THROWS(wrap_martingale(b, other, 0.0));
}

TEST_CASE("geometric skew reduces to the driver at delta 0 and to reflection at delta 1") {
    TimeGrid g{512, 1.0};
    SamplePath b = bm(g, 11, "B", 0);
    SamplePath w = bm(g, 11, "W", 0);

    Decomposition flat = geometric_skew_bm(b, w, 0.0);
    CHECK(flat.x.values == b.values);
    for (double v : flat.v.values) CHECK(v == 0.0);

    Decomposition refl = geometric_skew_bm(b, w, 1.0);
    LocalTimeEstimate lw = local_time_tanaka(w);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(refl.x.values[j] == std::fabs(w.values[j]));
        CHECK(refl.v.values[j] == lw.l.values[j]);
        CHECK(refl.a.values[j] == 0.0);
    }

    CHECK_THROWS(geometric_skew_bm(b, w, 1.5));
    CHECK_THROWS(geometric_skew_bm(b, w, -1.1));
}

TEST_CASE("geometric skew decomposition closes and its v sits on the auxiliary zeros") {
    TimeGrid g{2048, 1.0};
    for (std::uint64_t path = 0; path < 40; ++path) {
        SamplePath b = bm(g, 17, "B", path);
        SamplePath w = bm(g, 17, "W", path);
        Decomposition d = geometric_skew_bm(b, w, 0.6);
        CHECK(rel_sup_gap(d) < 1e-9);
        CarrierReport cr = carrier_check(d.v, d.v_carrier, d.v_band);
        CHECK(cr.fraction_outside == 0.0);
        CHECK(cr.total_mass > 0.0);
    }
}

TEST_CASE("abs_of reproduces the reflection identity on a Brownian input") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 23, "B", 0);
    Decomposition d = abs_of(wrap_martingale(b, b, 0.0));

    LocalTimeEstimate lb = local_time_tanaka(b);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(d.x.values[j] == std::fabs(b.values[j]));
        CHECK(d.a.values[j] == lb.l.values[j]);
        CHECK(d.v.values[j] == 0.0);
    }
    CHECK(rel_sup_gap(d) < 1e-9);
    CHECK(carrier_check(d.a, d.a_carrier, d.a_band).fraction_outside == 0.0);
    CHECK(a_negative_fraction(d) == 0.0);
}

TEST_CASE("abs_of of the zero path is zero everywhere") {
    TimeGrid g{16, 1.0};
    SamplePath zero(g, "zero");
    Decomposition d = abs_of(wrap_martingale(zero, zero, 0.0));
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(d.x.values[j] == 0.0);
        CHECK(d.m.values[j] == 0.0);
        CHECK(d.v.values[j] == 0.0);
        CHECK(d.a.values[j] == 0.0);
    }
}

TEST_CASE("abs_of of the skew build passes both carrier checks") {
    TimeGrid g{2048, 1.0};
    for (std::uint64_t path = 0; path < 20; ++path) {
        SamplePath b = bm(g, 29, "B", path);
        SamplePath w = bm(g, 29, "W", path);
        Decomposition d = abs_of(geometric_skew_bm(b, w, 0.6));
        CHECK(rel_sup_gap(d) < 1e-9);
        CHECK(carrier_check(d.v, d.v_carrier, d.v_band).fraction_outside == 0.0);
        CHECK(carrier_check(d.a, d.a_carrier, d.a_band).fraction_outside == 0.0);
        CHECK(a_negative_fraction(d) == 0.0);
    }
}

TEST_CASE("abs_of twice is still the absolute value") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 31, "B", 0);
    Decomposition once = abs_of(wrap_martingale(b, b, 0.0));
    Decomposition twice = abs_of(once);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(twice.x.values[j] == std::fabs(b.values[j]));
    CHECK(rel_sup_gap(twice) < 1e-9);
}

TEST_CASE("pos_neg_mix at unit slopes equals abs_of") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 37, "B", 0);
    Decomposition in = wrap_martingale(b, b, 0.0);
    Decomposition via_abs = abs_of(in);
    Decomposition via_mix = pos_neg_mix(in, 1.0, 1.0);

    CHECK(via_mix.x.values == via_abs.x.values);
    CHECK(via_mix.m.values == via_abs.m.values);
    CHECK(via_mix.v.values == via_abs.v.values);
    double gap = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        gap = std::max(gap, std::fabs(via_mix.a.values[j] - via_abs.a.values[j]));
    CHECK(gap < 1e-10);
}

TEST_CASE("pos_neg_mix keeps the positive part only at slopes (1, 0)") {
    TimeGrid g{512, 1.0};
    SamplePath b = bm(g, 41, "B", 0);
    Decomposition d = pos_neg_mix(wrap_martingale(b, b, 0.0), 1.0, 0.0);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(d.x.values[j] == std::max(b.values[j], 0.0));
    CHECK(rel_sup_gap(d) < 1e-9);

    CHECK_THROWS(pos_neg_mix(wrap_martingale(b, b, 0.0), 1.2, 0.5));
    CHECK_THROWS(pos_neg_mix(wrap_martingale(b, b, 0.0), 0.5, -0.1));
}

TEST_CASE("pos_neg_mix carrier checks on the skew ensemble") {
    TimeGrid g{2048, 1.0};
    for (std::uint64_t path = 0; path < 20; ++path) {
        SamplePath b = bm(g, 43, "B", path);
        SamplePath w = bm(g, 43, "W", path);
        Decomposition d = pos_neg_mix(geometric_skew_bm(b, w, 0.6), 0.3, 0.8);
        CHECK(rel_sup_gap(d) < 1e-9);
        CHECK(carrier_check(d.v, d.v_carrier, d.v_band).fraction_outside == 0.0);
        CHECK(carrier_check(d.a, d.a_carrier, d.a_band).fraction_outside == 0.0);
    }
}

TEST_CASE("max shift matches the direct max evaluation pointwise") {
    TimeGrid g{512, 1.0};
    for (std::uint64_t path = 0; path < 20; ++path) {
        SamplePath m = bm(g, 47, "B", path);
        SamplePath d = bm(g, 47, "W", path);
        Decomposition z = max_shift_example(m, d);
        const double d0 = std::fabs(d.values[0]);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double direct =
                std::fabs(std::max(m.values[j] - d.values[j], m.values[j] + d.values[j]) - d0);
            CHECK(z.x.values[j] == direct);
        }
        CHECK(rel_sup_gap(z) < 1e-9);
        CHECK(carrier_check(z.v, z.v_carrier, z.v_band).fraction_outside == 0.0);
        CHECK(carrier_check(z.a, z.a_carrier, z.a_band).fraction_outside == 0.0);
    }
}

TEST_CASE("max shift degenerate inputs") {
    TimeGrid g{512, 1.0};
    SamplePath d = bm(g, 53, "W", 0);
    SamplePath zero(g, "zero");

    // with no martingale part the construction is |d| twice over
    Decomposition none = max_shift_example(zero, d);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(none.x.values[j] == std::fabs(d.values[j]));

    // a frozen d contributes nothing beyond rounding
    SamplePath m = bm(g, 53, "B", 0);
    SamplePath frozen(g, std::vector<double>(g.size(), 3.7), "const");
    Decomposition still = max_shift_example(m, frozen);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(still.x.values[j] == doctest::Approx(std::fabs(m.values[j])).epsilon(1e-12));
}

TEST_CASE("balayage example with constant sweeps") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 59, "B", 0);
    SamplePath w = bm(g, 59, "W", 0);
    Decomposition in = geometric_skew_bm(b, w, 0.6);

    SamplePath ones(g, std::vector<double>(g.size(), 1.0), "k");
    Decomposition same = balayage_example(in, ones);
    CHECK(same.x.values == in.x.values);
    double gap_m = 0.0, gap_v = 0.0, sup_a = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        gap_m = std::max(gap_m, std::fabs(same.m.values[j] - in.m.values[j]));
        gap_v = std::max(gap_v, std::fabs(same.v.values[j] - in.v.values[j]));
        sup_a = std::max(sup_a, std::fabs(same.a.values[j]));
    }
    CHECK(gap_m < 1e-11);
    CHECK(gap_v < 1e-11);
    CHECK(sup_a < 1e-10);

    SamplePath zeros(g, "k");
    Decomposition gone = balayage_example(in, zeros);
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(gone.x.values[j] == 0.0);
        CHECK(gone.m.values[j] == 0.0);
        CHECK(gone.v.values[j] == 0.0);
        CHECK(gone.a.values[j] == 0.0);
    }
}

TEST_CASE("balayage example with a martingale sweep keeps carriers") {
    TimeGrid g{4096, 1.0};
    double outside = 0.0, total = 0.0;
    for (std::uint64_t path = 0; path < 10; ++path) {
        SamplePath b = bm(g, 61, "B", path);
        SamplePath w = bm(g, 61, "W", path);
        SamplePath w2 = bm(g, 61, "W2", path);
        Decomposition in = geometric_skew_bm(b, w, 0.6);

        ExcursionSet exc2 = detect_excursions(w2, 0.0);
        SignAssignment marks = assign_signs(exc2, 0.5, rng::Substream(61, "kmarks", path));
        SamplePath k = sweep_fill(k_process(w2, exc2, marks), 1.0);

        Decomposition out = balayage_example(in, k);
        CHECK(rel_sup_gap(out) < 1e-9);
        CHECK(carrier_check(out.v, out.v_carrier, out.v_band).fraction_outside == 0.0);
        CarrierReport cr = carrier_check(out.a, out.a_carrier, out.a_band);
        outside += cr.outside_mass;
        total += cr.total_mass;
    }
    REQUIRE(total > 0.0);
    CHECK(outside / total < 0.02);
}

TEST_CASE("min_of recovers the smaller of nested builds") {
    TimeGrid g{2048, 1.0};
    Decomposition x1 = reflected(g, 67, 0);
    Decomposition x2 = scale_dec(x1, 2.0);
    Decomposition z = min_of(x1, x2);
    CHECK(z.x.values == x1.x.values);
    CHECK(rel_sup_gap(z) < 1e-9);
    CHECK(!z.warning);

    Decomposition same = min_of(x1, x1);
    CHECK(same.x.values == x1.x.values);
    CHECK(same.m.values == x1.m.values);
    CHECK(same.v.values == x1.v.values);
    CHECK(same.a.values == x1.a.values);

    TimeGrid h{64, 1.0};
    Decomposition pos = reflected(h, 67, 1);
    SamplePath zero(h, "zero");
    Decomposition floor = min_of(pos, abs_of(wrap_martingale(zero, zero, 0.0)));
    for (std::size_t j = 0; j < h.size(); ++j) CHECK(floor.x.values[j] == 0.0);
}

TEST_CASE("min_of flags inputs that disagree on the carrier band") {
    TimeGrid g{512, 1.0};
    Decomposition x1 = reflected(g, 71, 0);
    Decomposition z = min_of(x1, const_dec(g, 1.0));
    CHECK(z.warning);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(z.x.values[j] == std::min(x1.x.values[j], 1.0));
}

TEST_CASE("min_of keeps the finite variation parts on the widened carriers") {
    TimeGrid g{4096, 1.0};
    for (std::uint64_t path = 0; path < 10; ++path) {
        SamplePath b = bm(g, 73, "B", path);
        SamplePath w = bm(g, 73, "W", path);
        Decomposition x1 = abs_of(geometric_skew_bm(b, w, 0.6));
        Decomposition z = min_of(x1, scale_dec(x1, 2.0));
        CHECK(rel_sup_gap(z) < 1e-9);
        CHECK(carrier_check(z.v, z.v_carrier, z.v_band).fraction_outside == 0.0);
        CHECK(carrier_check(z.a, z.a_carrier, z.a_band).fraction_outside == 0.0);
        CHECK(a_negative_fraction(z) < 0.01);
    }
}

TEST_CASE("product_of needs two factors and folds reductions exactly") {
    TimeGrid g{1024, 1.0};
    Decomposition x = reflected(g, 79, 0);
    CHECK_THROWS(product_of({x}));

    Decomposition by_one = product_of({x, const_dec(g, 1.0)});
    CHECK(by_one.x.values == x.x.values);
    double gap = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        gap = std::max(gap, std::fabs(by_one.m.values[j] - x.m.values[j]));
        gap = std::max(gap, std::fabs(by_one.v.values[j] - x.v.values[j]));
        gap = std::max(gap, std::fabs(by_one.a.values[j] - x.a.values[j]));
    }
    CHECK(gap < 1e-11);

    Decomposition by_zero = product_of({x, const_dec(g, 0.0)});
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(by_zero.x.values[j] == 0.0);
        CHECK(by_zero.m.values[j] == 0.0);
        CHECK(by_zero.v.values[j] == 0.0);
        CHECK(by_zero.a.values[j] == 0.0);
    }

    Decomposition triple = product_of({x, const_dec(g, 1.0), const_dec(g, 1.0)});
    CHECK(triple.x.values == x.x.values);
}

TEST_CASE("product of independent reflected drivers keeps carriers") {
    TimeGrid g{2048, 1.0};
    for (std::uint64_t path = 0; path < 10; ++path) {
        Decomposition p = reflected(g, 83, 2 * path);
        Decomposition q = reflected(g, 83, 2 * path + 1);
        Decomposition z = product_of({p, q});
        CHECK(rel_sup_gap(z) < 1e-9);
        CHECK(carrier_check(z.a, z.a_carrier, z.a_band).fraction_outside == 0.0);
        CHECK(a_negative_fraction(z) == 0.0);

        // the fold is symmetric in its two factors
        Decomposition zr = product_of({q, p});
        CHECK(zr.x.values == z.x.values);
        CHECK(zr.m.values == z.m.values);
        CHECK(zr.a.values == z.a.values);
    }
}

TEST_CASE("f_of_A_transform trivial shapes") {
    TimeGrid g{1024, 1.0};
    Decomposition x = reflected(g, 89, 0);

    FTransform unit = f_of_A_transform(x, RegisteredFn{FnKind::polynomial, {1.0}});
    CHECK(unit.dec.x.values == x.x.values);
    double gap = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        gap = std::max(gap,
                       std::fabs(unit.companion.values[j] - (x.x.values[j] - x.a.values[j])));
    CHECK(gap < 1e-11);

    FTransform nil = f_of_A_transform(x, RegisteredFn{FnKind::polynomial, {0.0}});
    for (std::size_t j = 0; j < g.size(); ++j) {
        CHECK(nil.dec.x.values[j] == 0.0);
        CHECK(nil.companion.values[j] == 0.0);
    }
}

TEST_CASE("f_of_A_transform matches direct evaluation for each registered shape") {
    TimeGrid g{1024, 1.0};
    Decomposition x = reflected(g, 97, 0);

    RegisteredFn doubling{FnKind::polynomial, {0.0, 2.0}};
    FTransform ft = f_of_A_transform(x, doubling);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(ft.dec.x.values[j] == 2.0 * x.a.values[j] * x.x.values[j]);
    CHECK(rel_sup_gap(ft.dec) < 1e-9);
    CHECK(carrier_check(ft.dec.a, ft.dec.a_carrier, ft.dec.a_band).fraction_outside == 0.0);

    RegisteredFn damped{FnKind::exponential, {1.0, -0.5}};
    FTransform et = f_of_A_transform(x, damped);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(et.dec.x.values[j] == std::exp(-0.5 * x.a.values[j]) * x.x.values[j]);
    CHECK(rel_sup_gap(et.dec) < 1e-9);

    RegisteredFn clip{FnKind::clipped, {0.0, 0.3}};
    FTransform ct = f_of_A_transform(x, clip);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(ct.dec.x.values[j] ==
              std::min(std::max(x.a.values[j], 0.0), 0.3) * x.x.values[j]);
    CHECK(rel_sup_gap(ct.dec) < 1e-9);
}

TEST_CASE("f_of_A_transform rejects bad shapes and non-finite values") {
    TimeGrid g{256, 1.0};
    Decomposition x = reflected(g, 101, 0);
    CHECK_THROWS(f_of_A_transform(x, RegisteredFn{FnKind::polynomial, {}}));
    CHECK_THROWS(f_of_A_transform(x, RegisteredFn{FnKind::exponential, {1.0}}));
    CHECK_THROWS(f_of_A_transform(x, RegisteredFn{FnKind::clipped, {2.0, 1.0}}));
    CHECK_THROWS(f_of_A_transform(x, RegisteredFn{FnKind::exponential, {1.0, 1e6}}));
}

TEST_CASE("skew delta solution reduces to reflection at alpha 1 delta 0") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 103, "B", 0);
    SamplePath w = bm(g, 103, "W", 0);
    SkewBuild s = skew_solution_delta(b, w, 0.0, 1.0, rng::Substream(103, "K", 0),
                                      rng::Substream(103, "Z", 0));
    CHECK(s.x_base.values == b.values);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(s.y.values[j] == std::fabs(b.values[j]));
    CHECK(!s.truncated);
}

TEST_CASE("skew delta sign frequency is alpha") {
    TimeGrid g{2048, 1.0};
    const double alpha = 0.7;
    const std::size_t n_paths = 2000;
    std::size_t positive = 0;
    for (std::uint64_t path = 0; path < n_paths; ++path) {
        SamplePath b = bm(g, 107, "B", path);
        SamplePath w = bm(g, 107, "W", path);
        SkewBuild s = skew_solution_delta(b, w, 0.6, alpha, rng::Substream(107, "K", path),
                                          rng::Substream(107, "Z", path));
        if (s.y.back() > 0.0) ++positive;
    }
    const double freq = double(positive) / double(n_paths);
    CHECK(std::fabs(freq - alpha) < 3.0 * stats::binom_sigma(alpha, n_paths));
}

TEST_CASE("skew delta determinism and stream separation") {
    TimeGrid g{512, 1.0};
    SamplePath b = bm(g, 109, "B", 0);
    SamplePath w = bm(g, 109, "W", 0);
    SkewBuild s1 = skew_solution_delta(b, w, 0.6, 0.5, rng::Substream(109, "K", 0),
                                       rng::Substream(109, "Z", 0));
    SkewBuild s2 = skew_solution_delta(b, w, 0.6, 0.5, rng::Substream(109, "K", 0),
                                       rng::Substream(109, "Z", 0));
    CHECK(s1.y.values == s2.y.values);

    SkewBuild s3 = skew_solution_delta(b, w, 0.6, 0.5, rng::Substream(109, "K", 0),
                                       rng::Substream(109, "Z", 1));
    CHECK(s1.y.values != s3.y.values);
}

TEST_CASE("inhomogeneous delta solution reduces to one piece bitwise") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 113, "B", 0);
    SamplePath w = bm(g, 113, "W", 0);
    PiecewiseAlpha single{{0.0}, {0.7}};
    SkewBuild hom = skew_solution_delta(b, w, 0.6, 0.7, rng::Substream(113, "K", 0),
                                        rng::Substream(113, "Z", 0));
    SkewBuild inh = skew_solution_delta_inhom(b, w, 0.6, single, rng::Substream(113, "K", 0),
                                              rng::Substream(113, "Z", 0));
    CHECK(hom.y.values == inh.y.values);
    CHECK(hom.transform.values == inh.transform.values);
}

TEST_CASE("inhomogeneous flip switches sign at the breakpoint") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 127, "B", 0);
    SamplePath w = bm(g, 127, "W", 0);
    PiecewiseAlpha pieces{{0.0, 0.5}, {1.0, 0.0}};
    SkewBuild s = skew_solution_delta_inhom(b, w, 0.0, pieces, rng::Substream(127, "K", 0),
                                            rng::Substream(127, "Z", 0));
    bool saw_positive = false, saw_negative = false;
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (s.exc.mask[j]) continue;
        const bool early = g.time(j) < 0.5;
        CHECK((s.y.values[j] > 0.0) == early);
        (early ? saw_positive : saw_negative) = true;
    }
    CHECK(saw_positive);
    CHECK(saw_negative);
}

TEST_CASE("inhomogeneous delta frequency tracks the pieces") {
    TimeGrid g{1024, 1.0};
    PiecewiseAlpha pieces{{0.0, 0.5}, {0.8, 0.3}};
    const std::size_t probe_early = 256, probe_late = 768;
    std::size_t pos_early = 0, n_early = 0, pos_late = 0, n_late = 0;
    for (std::uint64_t path = 0; path < 1500; ++path) {
        SamplePath b = bm(g, 131, "B", path);
        SamplePath w = bm(g, 131, "W", path);
        SkewBuild s =
            skew_solution_delta_inhom(b, w, 0.6, pieces, rng::Substream(131, "K", path),
                                      rng::Substream(131, "Z", path));
        if (!s.exc.mask[probe_early]) {
            ++n_early;
            if (s.y.values[probe_early] > 0.0) ++pos_early;
        }
        if (!s.exc.mask[probe_late]) {
            ++n_late;
            if (s.y.values[probe_late] > 0.0) ++pos_late;
        }
    }
    REQUIRE(n_early > 1000);
    REQUIRE(n_late > 1000);
    CHECK(std::fabs(double(pos_early) / double(n_early) - 0.8) <
          3.0 * stats::binom_sigma(0.8, n_early));
    CHECK(std::fabs(double(pos_late) / double(n_late) - 0.3) <
          3.0 * stats::binom_sigma(0.3, n_late));
}

TEST_CASE("general solution reduces to the time-changed path when nothing flips") {
    TimeGrid g{2048, 1.0};
    SamplePath b = bm(g, 137, "B", 0);
    Decomposition x = abs_of(wrap_martingale(b, b, 0.0));
    SkewBuild s = skew_solution_general(x, b, 1.0, rng::Substream(137, "K", 0),
                                        rng::Substream(137, "Z", 0));

    SamplePath qv = quadratic_variation(x.m);
    bool any_truncated = false;
    for (std::size_t j = 0; j < g.size(); ++j) {
        TimeChangeResult tc = time_change(qv, g.time(j));
        any_truncated = any_truncated || tc.truncated;
        CHECK(s.y.values[j] == x.x.values[tc.index]);
    }
    CHECK(s.truncated == any_truncated);
}

TEST_CASE("general solution of the zero build is zero and flagged") {
    TimeGrid g{256, 1.0};
    SamplePath zero(g, "zero");
    Decomposition x = wrap_martingale(zero, zero, 0.0);
    SkewBuild s = skew_solution_general(x, zero, 0.5, rng::Substream(139, "K", 0),
                                        rng::Substream(139, "Z", 0));
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(s.y.values[j] == 0.0);
    CHECK(s.truncated);
}

TEST_CASE("general solution runs at the quadratic variation clock") {
    TimeGrid g{4096, 1.0};
    stats::MeanVar qv_end;
    for (std::uint64_t path = 0; path < 60; ++path) {
        SamplePath b = bm(g, 149, "B", path);
        Decomposition x = abs_of(wrap_martingale(b, b, 0.0));
        SkewBuild s = skew_solution_general(x, b, 0.3, rng::Substream(149, "K", path),
                                            rng::Substream(149, "Z", path));
        qv_end.add(quadratic_variation(s.x_base).back());
    }
    CHECK(std::fabs(qv_end.mean - 1.0) < 0.05);
}

TEST_CASE("general single piece matches the homogeneous solver bitwise") {
    TimeGrid g{1024, 1.0};
    SamplePath b = bm(g, 151, "B", 0);
    Decomposition x = abs_of(wrap_martingale(b, b, 0.0));
    PiecewiseAlpha single{{0.0}, {0.4}};
    SkewBuild hom = skew_solution_general(x, b, 0.4, rng::Substream(151, "K", 0),
                                          rng::Substream(151, "Z", 0));
    SkewBuild inh = skew_solution_general_inhom(x, b, single, rng::Substream(151, "K", 0),
                                                rng::Substream(151, "Z", 0));
    CHECK(hom.y.values == inh.y.values);
}

TEST_CASE("companion W telescopes to the absolute value") {
    TimeGrid g{2048, 1.0};
    const double band = 0.5 * std::sqrt(g.dt());
    for (std::uint64_t path = 0; path < 20; ++path) {
        SamplePath b = bm(g, 157, "B", path);
        SamplePath x_abs = b;
        for (double& v : x_abs.values) v = std::fabs(v);
        SamplePath w = companion_W_from_abs(x_abs, rng::Substream(157, "C", path));

        ExcursionSet exc = detect_excursions(x_abs, band);
        double sup_all = 0.0, sup_off = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double gap = std::fabs(std::fabs(w.values[j]) - x_abs.values[j]);
            sup_all = std::max(sup_all, gap);
            if (!exc.mask[j]) sup_off = std::max(sup_off, gap);
        }
        CHECK(sup_all <= band + 1e-10);
        CHECK(sup_off <= 1e-10);
        CHECK(sup_all < 5.0 * std::sqrt(g.dt()));
    }

    SamplePath zero(g, "zero");
    SamplePath wz = companion_W_from_abs(zero, rng::Substream(157, "C", 99));
    for (double v : wz.values) CHECK(v == 0.0);
}
