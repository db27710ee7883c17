#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "sigmar/balayage.hpp"
#include "sigmar/flip.hpp"
#include "sigmar/stats.hpp"

using namespace sigmar;

namespace {

SamplePath from_values(std::vector<double> v, double horizon = 1.0) {
    TimeGrid g{v.size() - 1, horizon};
    return SamplePath(g, std::move(v));
}

SamplePath abs_path(const SamplePath& p) {
    SamplePath a = p;
    for (double& v : a.values) v = std::fabs(v);
    return a;
}

}  // namespace

TEST_CASE("ito integral of constants") {
    SamplePath y = from_values({1.0, 3.0, 2.0, 5.0});
    SamplePath one = from_values({1.0, 1.0, 1.0, 1.0});
    SamplePath zero = from_values({0.0, 0.0, 0.0, 0.0});
    CHECK(ito_integral(one, y).values == std::vector<double>({0.0, 2.0, 1.0, 4.0}));
    CHECK(ito_integral(zero, y).values == std::vector<double>({0.0, 0.0, 0.0, 0.0}));
    SamplePath other(TimeGrid{5, 1.0});
    CHECK_THROWS(ito_integral(one, other));
}

TEST_CASE("ito integral of B dB matches the Ito formula at the right rate") {
    // E[B1^2/2 - 1/2 - int B dB] = 0 and the pathwise defect is
    // sum (dB^2 - dt)/2 with sd sqrt(dt/2): halving dt four times divides the
    // mean absolute defect by about 4
    const std::size_t n_paths = 2000;
    double mean_abs_coarse = 0.0, mean_abs_fine = 0.0;
    stats::MeanVar terminal;
    for (int level = 8; level <= 12; level += 4) {
        TimeGrid g{std::size_t(1) << level, 1.0};
        double acc = 0.0;
        for (std::size_t path = 0; path < n_paths; ++path) {
            SamplePath b = simulate_brownian(g, rng::Substream(51, "B", path), 0.0);
            SamplePath ib = ito_integral(b, b);
            const double defect = 0.5 * b.back() * b.back() - 0.5 - ib.back();
            acc += std::fabs(defect);
            if (level == 8) terminal.add(ib.back());
        }
        (level == 8 ? mean_abs_coarse : mean_abs_fine) = acc / n_paths;
    }
    // terminal mean of int B dB is 0 (it is a martingale)
    CHECK(std::fabs(terminal.mean) < 3.0 * terminal.sem());
    const double expected_sd_fine = std::sqrt(0.5 / (1 << 12));
    CHECK(mean_abs_fine < 3.0 * expected_sd_fine);
    const double ratio = mean_abs_coarse / mean_abs_fine;
    CHECK(ratio > 2.8);
    CHECK(ratio < 5.7);
}

TEST_CASE("balayage transform of the trivial sweeps") {
    SamplePath y = from_values({0.0, 1.0, -1.0, 0.0, 2.0});
    ExcursionSet exc = detect_excursions(y, 0.0);
    SamplePath one = from_values({1.0, 1.0, 1.0, 1.0, 1.0});
    CHECK(balayage_transform(one, y, exc).values == y.values);
    SamplePath zeros = from_values({0.0, 0.0, 0.0, 0.0, 0.0});
    ExcursionSet none = detect_excursions(zeros, 0.0);
    SamplePath k = from_values({3.0, -2.0, 1.0, 0.5, 7.0});
    CHECK(balayage_transform(k, zeros, none).values == std::vector<double>({0.0, 0.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("balayage transform equals the per-index rescan") {
    TimeGrid g{1024, 1.0};
    SamplePath w = simulate_brownian(g, rng::Substream(53, "W", 0), 0.0);
    SamplePath b = simulate_brownian(g, rng::Substream(53, "B", 0), 0.0);
    const double delta = 0.6;
    SamplePath xd(g, "X");
    for (std::size_t j = 0; j < g.size(); ++j)
        xd.values[j] = std::sqrt(1.0 - delta * delta) * b[j] + delta * std::fabs(w[j]);
    SamplePath xabs = abs_path(xd);
    const double band = 0.5 * std::sqrt(g.dt());
    ExcursionSet exc = detect_excursions(xabs, band);

    ExcursionSet exc_w = detect_excursions(w, 0.0);
    SamplePath kw = k_process(w, exc_w, assign_signs(exc_w, 0.5, rng::Substream(53, "kmarks", 0)));

    SamplePath swept = balayage_transform(kw, xabs, exc);
    for (std::size_t j = 0; j < g.size(); ++j) {
        // plain rescan for the last banded index at or before j
        std::size_t gt = 0;
        for (std::size_t i = 0; i <= j; ++i)
            if (exc.mask[i]) gt = i;
        CHECK(swept[j] == kw[gt] * xabs[j]);
    }
}

TEST_CASE("residual of the constant sweep vanishes") {
    TimeGrid g{2048, 1.0};
    SamplePath y = simulate_brownian(g, rng::Substream(59, "B", 0), 0.0);
    ExcursionSet exc = detect_excursions(y, 0.0);
    SamplePath one(g);
    for (double& v : one.values) v = 1.0;
    SamplePath r = residual_R(one, y, exc);
    double sup = 0.0;
    for (double v : r.values) sup = std::max(sup, std::fabs(v));
    // pure float resummation residue, far below any path scale
    CHECK(sup < 1e-10);

    SamplePath zeros(g);
    ExcursionSet none = detect_excursions(zeros, 0.0);
    SamplePath r0 = residual_R(one, zeros, none);
    for (double v : r0.values) CHECK(v == 0.0);
}

TEST_CASE("residual mass of a flip sweep sits on the zero set") {
    TimeGrid g{4096, 1.0};
    double worst = 0.0;
    for (std::size_t path = 0; path < 20; ++path) {
        SamplePath babs = abs_path(simulate_brownian(g, rng::Substream(61, "B", path), 0.0));
        const double band = 0.5 * std::sqrt(g.dt());
        ExcursionSet exc = detect_excursions(babs, band);
        SamplePath z = z_process(babs, exc, assign_signs(exc, 0.5, rng::Substream(61, "zmarks", path)));
        SamplePath r = residual_R(z, babs, exc);
        CarrierReport rep = carrier_check(r, babs, std::sqrt(g.dt()));
        worst = std::max(worst, rep.fraction_outside);
    }
    CHECK(worst < 0.02);
}

TEST_CASE("carrier check on hand-built masses") {
    SamplePath flat = from_values({1.0, 1.0, 1.0, 1.0});
    SamplePath carrier = from_values({0.0, 1.0, 0.0, 1.0});
    CarrierReport rep = carrier_check(flat, carrier, 0.0);
    CHECK(rep.total_mass == 0.0);
    CHECK(rep.fraction_outside == 0.0);

    // increments placed only where the carrier is far from zero
    SamplePath fv = from_values({0.0, 0.0, 0.0, 0.0, 1.0, 1.0});
    SamplePath far = from_values({5.0, 5.0, 5.0, 5.0, 5.0, 5.0});
    rep = carrier_check(fv, far, 0.5);
    CHECK(rep.total_mass == 1.0);
    CHECK(rep.fraction_outside == 1.0);

    // same mass against a carrier that is zero there
    SamplePath near = from_values({5.0, 5.0, 5.0, 5.0, 0.0, 5.0});
    rep = carrier_check(fv, near, 0.5);
    CHECK(rep.fraction_outside == 0.0);
}

TEST_CASE("carrier fraction is monotone in the band") {
    TimeGrid g{512, 1.0};
    SamplePath carrier = simulate_brownian(g, rng::Substream(67, "B", 0), 0.0);
    SamplePath fv(g);
    rng::Substream mass(67, "mass", 0);
    double acc = 0.0;
    for (std::size_t j = 1; j < g.size(); ++j) {
        acc += mass.uniform(j, 0);
        fv.values[j] = acc;
    }
    double prev = 2.0;
    for (double band : {0.0, 0.01, 0.05, 0.2, 1.0}) {
        const double frac = carrier_check(fv, carrier, band).fraction_outside;
        CHECK(frac <= prev);
        prev = frac;
    }
}

TEST_CASE("mask_path and mask_union build union carriers") {
    TimeGrid g{3, 1.0};
    std::vector<unsigned char> a = {1, 0, 0, 1};
    std::vector<unsigned char> b = {0, 0, 1, 1};
    auto u = mask_union(a, b);
    CHECK(u == std::vector<unsigned char>({1, 0, 1, 1}));
    SamplePath ind = mask_path(g, u);
    CHECK(ind.values == std::vector<double>({0.0, 1.0, 0.0, 0.0}));
    CHECK_THROWS(mask_union(a, std::vector<unsigned char>{1}));
}
