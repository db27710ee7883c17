#include "sigmar/constructors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

#include "sigmar/balayage.hpp"

namespace sigmar {

namespace {

double sgn0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

SamplePath sign_path(const SamplePath& x, std::string role) {
    SamplePath out(x.grid, std::move(role));
    for (std::size_t j = 0; j < x.size(); ++j) out.values[j] = sgn0(x.values[j]);
    return out;
}

SamplePath abs_path(const SamplePath& x, std::string role) {
    SamplePath out(x.grid, std::move(role));
    for (std::size_t j = 0; j < x.size(); ++j) out.values[j] = std::fabs(x.values[j]);
    return out;
}

bool has_negative(const SamplePath& x) {
    for (double v : x.values)
        if (v < 0.0) return true;
    return false;
}

// Band the zero detector should read a path at: exact signs when the path is
// signed, half a step width when it is nonnegative.
double natural_band(const SamplePath& x, double scale) {
    return has_negative(x) ? 0.0 : scale * std::sqrt(x.grid.dt());
}

void append_note(std::string& dst, const std::string& extra) {
    if (extra.empty()) return;
    if (!dst.empty()) dst += "; ";
    dst += extra;
}

void inherit_flags(Decomposition& out, const Decomposition& in) {
    out.warning = in.warning;
    out.note = in.note;
}

}  // namespace

Decomposition wrap_martingale(const SamplePath& m, const SamplePath& d_for_h, double v_band) {
    require_same_grid(m, d_for_h, "wrap_martingale");
    Decomposition out;
    out.x = m;
    out.x.role = "x";
    out.m = m;
    out.m.role = "m";
    out.v = SamplePath(m.grid, "v");
    out.a = SamplePath(m.grid, "a");
    out.v_carrier = d_for_h;
    out.v_band = v_band;
    out.a_carrier = m;
    out.a_band = 0.0;
    return out;
}

Decomposition geometric_skew_bm(const SamplePath& b, const SamplePath& w, double delta) {
    require_same_grid(b, w, "geometric_skew_bm");
    if (!(std::fabs(delta) <= 1.0))
        throw std::invalid_argument("geometric_skew_bm: |delta| must be <= 1");

    const double c = std::sqrt(1.0 - delta * delta);
    const std::size_t n = b.size();

    SamplePath sw = sign_path(w, "sign_w");
    SamplePath itow = ito_integral(sw, w);
    LocalTimeEstimate lw = local_time_tanaka(w);

    Decomposition out;
    out.x = SamplePath(b.grid, "x");
    out.m = SamplePath(b.grid, "m");
    out.v = SamplePath(b.grid, "v");
    out.a = SamplePath(b.grid, "a");
    for (std::size_t j = 0; j < n; ++j) {
        out.x.values[j] = c * b.values[j] + delta * std::fabs(w.values[j]);
        out.m.values[j] = c * b.values[j] + delta * itow.values[j];
        out.v.values[j] = delta * lw.l.values[j];
    }
    out.v_carrier = w;
    out.v_band = 0.0;
    out.a_carrier = out.x;
    out.a_band = std::sqrt(b.grid.dt());
    return out;
}

Decomposition abs_of(const Decomposition& in) {
    SamplePath s = sign_path(in.x, "sign_x");
    LocalTimeEstimate lt = local_time_tanaka(in.x);
    SamplePath ia = ito_integral(s, in.a);

    Decomposition out;
    out.x = abs_path(in.x, "x");
    out.m = ito_integral(s, in.m);
    out.m.role = "m";
    out.v = ito_integral(s, in.v);
    out.v.role = "v";
    out.a = SamplePath(in.x.grid, "a");
    for (std::size_t j = 0; j < in.x.size(); ++j)
        out.a.values[j] = lt.l.values[j] + ia.values[j];
    out.v_carrier = in.v_carrier;
    out.v_band = in.v_band;
    out.a_carrier = in.x;
    out.a_band = in.a_band;
    inherit_flags(out, in);
    return out;
}

Decomposition pos_neg_mix(const Decomposition& in, double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("pos_neg_mix: alpha and beta must lie in [0,1]");

    const std::size_t n = in.x.size();
    SamplePath psi(in.x.grid, "psi");
    for (std::size_t j = 0; j < n; ++j) {
        const double x = in.x.values[j];
        psi.values[j] = alpha * (x > 0.0 ? 1.0 : 0.0) - beta * (x < 0.0 ? 1.0 : 0.0);
    }

    Decomposition out;
    out.x = SamplePath(in.x.grid, "x");
    for (std::size_t j = 0; j < n; ++j) {
        const double x = in.x.values[j];
        out.x.values[j] = alpha * std::max(x, 0.0) + beta * std::max(-x, 0.0);
    }
    out.m = ito_integral(psi, in.m);
    out.m.role = "m";
    out.v = ito_integral(psi, in.v);
    out.v.role = "v";

    // Per-step mass each half-line Tanaka identity leaves behind; both terms
    // vanish exactly on steps where the sign does not change.
    out.a = SamplePath(in.x.grid, "a");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double x0 = in.x.values[i], x1 = in.x.values[i + 1];
        const double dx = x1 - x0;
        const double tp = std::max(x1, 0.0) - std::max(x0, 0.0) - (x0 > 0.0 ? dx : 0.0);
        const double tn = std::max(-x1, 0.0) - std::max(-x0, 0.0) + (x0 < 0.0 ? dx : 0.0);
        const double da = psi.values[i] * (in.a.values[i + 1] - in.a.values[i]);
        out.a.values[i + 1] = out.a.values[i] + (alpha * tp + beta * tn + da);
    }
    out.v_carrier = in.v_carrier;
    out.v_band = in.v_band;
    out.a_carrier = in.x;
    out.a_band = in.a_band;
    inherit_flags(out, in);
    return out;
}

Decomposition max_shift_example(const SamplePath& m, const SamplePath& d) {
    require_same_grid(m, d, "max_shift_example");
    const std::size_t n = m.size();
    const double d0 = std::fabs(d.values[0]);

    SamplePath y(m.grid, "max_shift_pre");
    for (std::size_t j = 0; j < n; ++j)
        y.values[j] = m.values[j] + std::fabs(d.values[j]) - d0;

    SamplePath sy = sign_path(y, "sign_y");
    SamplePath syd(m.grid, "sign_yd");
    for (std::size_t j = 0; j < n; ++j)
        syd.values[j] = sy.values[j] * sgn0(d.values[j]);

    LocalTimeEstimate ld = local_time_tanaka(d);
    LocalTimeEstimate ly = local_time_tanaka(y);

    SamplePath im = ito_integral(sy, m);
    SamplePath id = ito_integral(syd, d);

    Decomposition out;
    out.x = abs_path(y, "x");
    out.m = SamplePath(m.grid, "m");
    for (std::size_t j = 0; j < n; ++j) out.m.values[j] = im.values[j] + id.values[j];
    out.v = ito_integral(sy, ld.l);
    out.v.role = "v";
    out.a = ly.l;
    out.a.role = "a";
    out.v_carrier = d;
    out.v_band = 0.0;
    out.a_carrier = y;
    out.a_band = 0.0;
    return out;
}

Decomposition balayage_example(const Decomposition& in, const SamplePath& k) {
    require_same_grid(in.x, k, "balayage_example");
    const std::size_t n = in.x.size();

    ExcursionSet exc = detect_excursions(in.x, natural_band(in.x, 0.5));
    std::vector<std::size_t> lz = last_zero_indices(exc);

    // One grid point behind the swept coefficient, so the integrals below use
    // the same predictable projection residual_R subtracts.
    SamplePath klag(in.x.grid, "k_lagged");
    for (std::size_t i = 0; i < n; ++i) klag.values[i] = k.values[lz[i > 0 ? i - 1 : 0]];

    SamplePath r = residual_R(k, in.x, exc);
    SamplePath iva = ito_integral(klag, in.a);

    Decomposition out;
    out.x = balayage_transform(k, in.x, exc);
    out.x.role = "x";
    out.m = ito_integral(klag, in.m);
    out.m.role = "m";
    out.v = ito_integral(klag, in.v);
    out.v.role = "v";
    out.a = SamplePath(in.x.grid, "a");
    for (std::size_t j = 0; j < n; ++j) out.a.values[j] = iva.values[j] + r.values[j];
    out.v_carrier = in.v_carrier;
    out.v_band = in.v_band;
    out.a_carrier = in.a_carrier;
    out.a_band = in.a_band;
    inherit_flags(out, in);
    return out;
}

Decomposition min_of(const Decomposition& x1, const Decomposition& x2) {
    require_same_grid(x1.x, x2.x, "min_of");
    const std::size_t n = x1.x.size();
    const TimeGrid& grid = x1.x.grid;

    SamplePath u(grid, "min_gap");
    SamplePath dm(grid, "dm"), dv(grid, "dv"), da(grid, "da");
    for (std::size_t j = 0; j < n; ++j) {
        u.values[j] = x1.x.values[j] - x2.x.values[j];
        dm.values[j] = x1.m.values[j] - x2.m.values[j];
        dv.values[j] = x1.v.values[j] - x2.v.values[j];
        da.values[j] = x1.a.values[j] - x2.a.values[j];
    }
    SamplePath su = sign_path(u, "sign_u");
    LocalTimeEstimate lu = local_time_tanaka(u);
    SamplePath im = ito_integral(su, dm);
    SamplePath iv = ito_integral(su, dv);
    SamplePath ia = ito_integral(su, da);

    Decomposition out;
    out.x = SamplePath(grid, "x");
    out.m = SamplePath(grid, "m");
    out.v = SamplePath(grid, "v");
    out.a = SamplePath(grid, "a");
    for (std::size_t j = 0; j < n; ++j) {
        out.x.values[j] = std::min(x1.x.values[j], x2.x.values[j]);
        out.m.values[j] = 0.5 * (x1.m.values[j] + x2.m.values[j] - im.values[j]);
        out.v.values[j] =
            0.5 * (x1.v.values[j] + x2.v.values[j] - iv.values[j] - lu.l.values[j]);
        out.a.values[j] = 0.5 * (x1.a.values[j] + x2.a.values[j] - ia.values[j]);
    }

    // The |x1 - x2| local time lands in v, so the carrier widens to the union
    // of both H bands and the gap's own zeros.
    std::vector<unsigned char> h_band = mask_union(zero_mask(x1.v_carrier, x1.v_band),
                                                   zero_mask(x2.v_carrier, x2.v_band));
    out.v_carrier = mask_path(grid, mask_union(h_band, zero_mask(u, 0.0)));
    out.v_band = 0.5;
    // Same story for a: its increments come from the inputs' a masses plus the
    // gap's local time, so the carrier is the matching union of zero sets.
    std::vector<unsigned char> a_sites = mask_union(zero_mask(x1.a_carrier, x1.a_band),
                                                    zero_mask(x2.a_carrier, x2.a_band));
    out.a_carrier = mask_path(grid, mask_union(a_sites, zero_mask(u, 0.0)));
    out.a_band = 0.5;

    out.warning = x1.warning || x2.warning;
    out.note = x1.note;
    append_note(out.note, x2.note);
    if (has_negative(x1.x) || has_negative(x2.x)) {
        out.warning = true;
        append_note(out.note, "min_of: negative input values");
    }
    double gap = 0.0;
    std::size_t n_band = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!h_band[j]) continue;
        gap += std::fabs(u.values[j]);
        ++n_band;
    }
    if (n_band > 0 && gap / static_cast<double>(n_band) > std::sqrt(grid.dt())) {
        out.warning = true;
        append_note(out.note, "min_of: inputs differ on the H band");
    }
    return out;
}

namespace {

Decomposition pair_product(const Decomposition& p, const Decomposition& q) {
    require_same_grid(p.x, q.x, "product_of");
    const std::size_t n = p.x.size();
    const TimeGrid& grid = p.x.grid;

    SamplePath im_q = ito_integral(p.x, q.m);
    SamplePath im_p = ito_integral(q.x, p.m);
    SamplePath iv_q = ito_integral(p.x, q.v);
    SamplePath iv_p = ito_integral(q.x, p.v);
    SamplePath ia_q = ito_integral(p.x, q.a);
    SamplePath ia_p = ito_integral(q.x, p.a);

    Decomposition out;
    out.x = SamplePath(grid, "x");
    out.m = SamplePath(grid, "m");
    out.v = SamplePath(grid, "v");
    out.a = SamplePath(grid, "a");
    double cross = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.x.values[j] = p.x.values[j] * q.x.values[j];
        out.m.values[j] = im_q.values[j] + im_p.values[j] + cross;
        out.v.values[j] = iv_q.values[j] + iv_p.values[j];
        out.a.values[j] = ia_q.values[j] + ia_p.values[j];
        if (j + 1 < n)
            cross += (p.x.values[j + 1] - p.x.values[j]) * (q.x.values[j + 1] - q.x.values[j]);
    }
    out.v_carrier = mask_path(grid, mask_union(zero_mask(p.v_carrier, p.v_band),
                                               zero_mask(q.v_carrier, q.v_band)));
    out.v_band = 0.5;
    out.a_carrier = mask_path(grid, mask_union(zero_mask(p.a_carrier, p.a_band),
                                               zero_mask(q.a_carrier, q.a_band)));
    out.a_band = 0.5;
    out.warning = p.warning || q.warning;
    out.note = p.note;
    append_note(out.note, q.note);
    return out;
}

}  // namespace

Decomposition product_of(const std::vector<Decomposition>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("product_of: needs at least two factors");
    Decomposition acc = pair_product(xs[0], xs[1]);
    for (std::size_t i = 2; i < xs.size(); ++i) acc = pair_product(acc, xs[i]);
    return acc;
}

double RegisteredFn::operator()(double t) const {
    switch (kind) {
        case FnKind::polynomial: {
            double r = 0.0;
            for (auto it = params.rbegin(); it != params.rend(); ++it) r = r * t + *it;
            return r;
        }
        case FnKind::exponential:
            return params[0] * std::exp(params[1] * t);
        case FnKind::clipped:
            return std::min(std::max(t, params[0]), params[1]);
    }
    return 0.0;
}

void validate_fn(const RegisteredFn& f) {
    switch (f.kind) {
        case FnKind::polynomial:
            if (f.params.empty())
                throw std::invalid_argument("registered fn: polynomial needs coefficients");
            return;
        case FnKind::exponential:
            if (f.params.size() != 2)
                throw std::invalid_argument("registered fn: exponential takes {scale, rate}");
            return;
        case FnKind::clipped:
            if (f.params.size() != 2 || !(f.params[0] <= f.params[1]))
                throw std::invalid_argument("registered fn: clipped takes {lo, hi} with lo <= hi");
            return;
    }
    throw std::invalid_argument("registered fn: unknown kind");
}

FTransform f_of_A_transform(const Decomposition& in, const RegisteredFn& f) {
    validate_fn(f);
    const std::size_t n = in.x.size();
    const TimeGrid& grid = in.x.grid;

    SamplePath fa(grid, "f_of_a");
    for (std::size_t j = 0; j < n; ++j) {
        fa.values[j] = f(in.a.values[j]);
        if (!std::isfinite(fa.values[j]))
            throw std::domain_error("f_of_A_transform: f produced a non-finite value");
    }

    SamplePath ia = ito_integral(fa, in.a);

    FTransform out;
    out.dec.x = SamplePath(grid, "x");
    out.dec.m = ito_integral(fa, in.m);
    out.dec.m.role = "m";
    out.dec.v = ito_integral(fa, in.v);
    out.dec.v.role = "v";
    out.dec.a = SamplePath(grid, "a");
    out.companion = SamplePath(grid, "companion");
    double abel = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.dec.x.values[j] = fa.values[j] * in.x.values[j];
        out.dec.a.values[j] = ia.values[j] + abel;
        out.companion.values[j] = out.dec.x.values[j] - ia.values[j];
        if (j + 1 < n) abel += in.x.values[j + 1] * (fa.values[j + 1] - fa.values[j]);
    }
    out.dec.v_carrier = in.v_carrier;
    out.dec.v_band = in.v_band;
    out.dec.a_carrier = in.a_carrier;
    out.dec.a_band = in.a_band;
    inherit_flags(out.dec, in);
    return out;
}

SamplePath sweep_fill(const SamplePath& k, double init) {
    SamplePath out(k.grid, "sweep");
    double cur = init;
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (k.values[j] != 0.0) cur = k.values[j];
        out.values[j] = cur;
    }
    return out;
}

SamplePath flip_or_keep(const SamplePath& flip, const SamplePath& transform) {
    require_same_grid(flip, transform, "flip_or_keep");
    SamplePath out(transform.grid, "y");
    for (std::size_t j = 0; j < transform.size(); ++j) {
        const double z = flip.values[j];
        out.values[j] = z == 0.0 ? transform.values[j] : z * transform.values[j];
    }
    return out;
}

namespace {

// Shared tail of the four skew solvers: sweep by the auxiliary martingale's
// half-open sign process held through the zero gaps, evaluate it at the base
// path's last zero, then flip the result's excursions.
SkewBuild sweep_and_flip(SamplePath x_base, const SamplePath& d_aux, double band,
                         double alpha, const PiecewiseAlpha* pieces,
                         const rng::Substream& k_stream, const rng::Substream& z_stream,
                         double k_mark_alpha, LocalTimeEstimate lhat, bool truncated) {
    ExcursionSet exc_d = detect_excursions(d_aux, 0.0);
    SignAssignment kmarks = assign_signs(exc_d, k_mark_alpha, k_stream);
    SamplePath kff = sweep_fill(k_process(d_aux, exc_d, kmarks), 1.0);

    SamplePath x_abs = abs_path(x_base, "x_abs");
    ExcursionSet exc_x = detect_excursions(x_abs, band);
    std::vector<std::size_t> lz = last_zero_indices(exc_x);

    SamplePath transform(x_base.grid, "transform");
    for (std::size_t j = 0; j < x_base.size(); ++j)
        transform.values[j] = kff.values[lz[j]] * x_abs.values[j];

    ExcursionSet exc_t = detect_excursions(transform, band);
    SamplePath z = pieces
                       ? z_process_inhom(transform, exc_t, InhomSignAssignment{*pieces, z_stream})
                       : z_process(transform, exc_t, assign_signs(exc_t, alpha, z_stream));

    SkewBuild out;
    out.y = flip_or_keep(z, transform);
    out.x_base = std::move(x_base);
    out.x_abs = std::move(x_abs);
    out.transform = std::move(transform);
    out.exc = std::move(exc_t);
    out.lhat = std::move(lhat);
    out.truncated = truncated;
    return out;
}

struct TimeChangedPair {
    SamplePath x_tc;
    SamplePath d_tc;
    bool truncated = false;
};

// tau_j for every grid time by one monotone sweep; agrees index by index
// with time_change(qv, t_j).
TimeChangedPair time_change_pair(const Decomposition& x, const SamplePath& d) {
    require_same_grid(x.x, d, "skew_solution_general");
    SamplePath qv = quadratic_variation(x.m);
    const std::size_t n = x.x.size();

    TimeChangedPair out;
    out.x_tc = SamplePath(x.x.grid, "x_tc");
    out.d_tc = SamplePath(x.x.grid, "d_tc");
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double t = x.x.grid.time(j);
        while (k < n && !(qv.values[k] > t)) ++k;
        std::size_t idx = k;
        if (k == n) {
            idx = n - 1;
            out.truncated = true;
        }
        out.x_tc.values[j] = x.x.values[idx];
        out.d_tc.values[j] = d.values[idx];
    }
    return out;
}

}  // namespace

SkewBuild skew_solution_delta(const SamplePath& b, const SamplePath& w, double delta,
                              double alpha, const rng::Substream& k_stream,
                              const rng::Substream& z_stream, double band_scale,
                              double k_mark_alpha) {
    Decomposition dec = geometric_skew_bm(b, w, delta);
    LocalTimeEstimate lhat = local_time_tanaka(dec.x);
    const double band = band_scale * std::sqrt(b.grid.dt());
    return sweep_and_flip(std::move(dec.x), w, band, alpha, nullptr, k_stream, z_stream,
                          k_mark_alpha, std::move(lhat), false);
}

SkewBuild skew_solution_delta_inhom(const SamplePath& b, const SamplePath& w, double delta,
                                    const PiecewiseAlpha& pieces,
                                    const rng::Substream& k_stream,
                                    const rng::Substream& z_stream, double band_scale,
                                    double k_mark_alpha) {
    validate_pieces(pieces);
    Decomposition dec = geometric_skew_bm(b, w, delta);
    LocalTimeEstimate lhat = local_time_tanaka(dec.x);
    const double band = band_scale * std::sqrt(b.grid.dt());
    return sweep_and_flip(std::move(dec.x), w, band, 0.0, &pieces, k_stream, z_stream,
                          k_mark_alpha, std::move(lhat), false);
}

SkewBuild skew_solution_general(const Decomposition& x, const SamplePath& d, double alpha,
                                const rng::Substream& k_stream,
                                const rng::Substream& z_stream, double band_scale,
                                double k_mark_alpha) {
    TimeChangedPair tc = time_change_pair(x, d);
    LocalTimeEstimate lhat =
        local_time_occupation(tc.x_tc, std::pow(x.x.grid.dt(), 0.4));
    const double band = natural_band(tc.x_tc, band_scale);
    return sweep_and_flip(std::move(tc.x_tc), tc.d_tc, band, alpha, nullptr, k_stream,
                          z_stream, k_mark_alpha, std::move(lhat), tc.truncated);
}

SkewBuild skew_solution_general_inhom(const Decomposition& x, const SamplePath& d,
                                      const PiecewiseAlpha& pieces,
                                      const rng::Substream& k_stream,
                                      const rng::Substream& z_stream, double band_scale,
                                      double k_mark_alpha) {
    validate_pieces(pieces);
    TimeChangedPair tc = time_change_pair(x, d);
    LocalTimeEstimate lhat =
        local_time_occupation(tc.x_tc, std::pow(x.x.grid.dt(), 0.4));
    const double band = natural_band(tc.x_tc, band_scale);
    return sweep_and_flip(std::move(tc.x_tc), tc.d_tc, band, 0.0, &pieces, k_stream,
                          z_stream, k_mark_alpha, std::move(lhat), tc.truncated);
}

SamplePath companion_W_from_abs(const SamplePath& x_abs, const rng::Substream& stream,
                                double band_scale) {
    const double band = band_scale * std::sqrt(x_abs.grid.dt());
    ExcursionSet exc = detect_excursions(x_abs, band);
    SignAssignment marks = assign_signs(exc, 0.5, stream);
    SamplePath k = k_process(x_abs, exc, marks);

    SamplePath snapped = x_abs;
    snapped.role = "x_snapped";
    for (std::size_t j = 0; j < snapped.size(); ++j)
        if (exc.mask[j]) snapped.values[j] = 0.0;

    SamplePath w = ito_integral(k, snapped);
    w.role = "companion_W";
    return w;
}

}  // namespace sigmar
