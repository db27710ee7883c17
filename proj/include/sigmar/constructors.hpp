#pragma once

#include <string>
#include <vector>

#include "sigmar/flip.hpp"
#include "sigmar/local_time.hpp"
#include "sigmar/path_engine.hpp"
#include "sigmar/rng.hpp"

namespace sigmar {

// A process split as x = m + v + a: martingale part, a finite-variation part
// whose mass sits on the zero band of v_carrier (the auxiliary martingale's
// zeros), and a second one carried by the zero band of a_carrier (the
// process' own zeros).  The bands are the zero_tol each carrier should be
// read at.  Constructors that can only check a precondition statistically
// set `warning` and describe the failure in `note` instead of throwing.
struct Decomposition {
    SamplePath x, m, v, a;
    SamplePath v_carrier, a_carrier;
    double v_band = 0.0;
    double a_band = 0.0;
    bool warning = false;
    std::string note;
};

// View a bare martingale path as a decomposition (x = m, v = a = 0).  d_for_h
// names the martingale whose zeros carry any v mass later constructions add.
Decomposition wrap_martingale(const SamplePath& m, const SamplePath& d_for_h, double v_band);

// x = sqrt(1 - delta^2) b + delta |w|, split by the discrete Tanaka identity
// applied to w.  Rejects |delta| > 1.
Decomposition geometric_skew_bm(const SamplePath& b, const SamplePath& w, double delta);

// |input|: multiply the m and v parts by sign(x) pointwise (left point) and
// collect the local time of x into a.  Meant for inputs whose own a part
// vanishes; a nonzero input a is folded into the output a, which keeps the
// identity but mixes carriers when the input's a lives elsewhere.
Decomposition abs_of(const Decomposition& in);

// alpha x^+ + beta x^-.  Same shape as abs_of with the two half-line slopes
// decoupled; alpha, beta must lie in [0,1].
Decomposition pos_neg_mix(const Decomposition& in, double alpha, double beta);

// |max(m - d, m + d) - |d_0||, built through the rewrite max(m-d, m+d) =
// m + |d| so the pieces are the two Tanaka splits stacked on each other.
Decomposition max_shift_example(const SamplePath& m, const SamplePath& d);

// k[g_t] x_t with g_t the last zero of x: the predictable-projection
// integrals of k against m, v, a plus the sweep residual, which lands in a.
Decomposition balayage_example(const Decomposition& in, const SamplePath& k);

// min(x1, x2) via 2 min = x1 + x2 - |x1 - x2|.  Expects both nonnegative and
// equal on the v-carrier band; violation sets the warning flag (checked as
// mean |x1 - x2| over the band against a sqrt(dt) scale).
Decomposition min_of(const Decomposition& x1, const Decomposition& x2);

// Pointwise product, folded pairwise by discrete integration by parts.  The
// cross term sum(dp dq) goes to m: for independent drivers it carries no
// systematic mass.  Needs at least two inputs.
Decomposition product_of(const std::vector<Decomposition>& xs);

// The scalar transforms allowed against the a part.  Registered shapes keep
// the config surface flat: polynomial = coefficients low to high, exponential
// = {scale, rate}, clipped = {lo, hi}.
enum class FnKind { polynomial, exponential, clipped };

struct RegisteredFn {
    FnKind kind = FnKind::polynomial;
    std::vector<double> params;

    double operator()(double t) const;
};

void validate_fn(const RegisteredFn& f);

// f(a) x together with the companion path f(a) x - integral of f(a) da.  The
// Abel summation term x_{j+1} (f(a)_{j+1} - f(a)_j) lands in a, so the output
// keeps the input's carriers.  Non-finite f values are rejected.
struct FTransform {
    Decomposition dec;
    SamplePath companion;
};

FTransform f_of_A_transform(const Decomposition& in, const RegisteredFn& f);

// Completes a half-open flip process (nonzero on [g, d) of each excursion,
// zero on the rest of the zero set) into an everywhere-defined sweep by
// holding the last nonzero value; `init` is the value before the first
// excursion.
SamplePath sweep_fill(const SamplePath& k, double init = 1.0);

// One skew construction with its intermediates kept for verification: the
// signed base path whose zeros drive the excursion structure, its absolute
// value, the sweep-transformed path, the excursions the flips were drawn on,
// and the local time estimate of the base path.
struct SkewBuild {
    SamplePath y;
    SamplePath x_base;
    SamplePath x_abs;
    SamplePath transform;
    ExcursionSet exc;
    LocalTimeEstimate lhat;
    bool truncated = false;
};

// Flip factors act on the transformed path only where the flip process is
// nonzero; the zero band keeps the transform's own (band-small) values, so
// the alpha = 1 / trivial-sweep reductions are exact.
SamplePath flip_or_keep(const SamplePath& flip, const SamplePath& transform);

// Skew solution driven by b with auxiliary martingale w: sweep |x^delta| by
// the w-excursion sign process evaluated at the last zero, then flip each
// excursion of the result with a Bernoulli(alpha) sign.  k_mark_alpha = 1
// makes the sweep trivially +1, the default construction.
SkewBuild skew_solution_delta(const SamplePath& b, const SamplePath& w, double delta,
                              double alpha, const rng::Substream& k_stream,
                              const rng::Substream& z_stream, double band_scale = 0.5,
                              double k_mark_alpha = 1.0);

// Piecewise-constant alpha(t): the flip sign may change at piece boundaries
// inside a single excursion.  A single piece reproduces skew_solution_delta
// bit for bit on shared streams.
SkewBuild skew_solution_delta_inhom(const SamplePath& b, const SamplePath& w, double delta,
                                    const PiecewiseAlpha& pieces,
                                    const rng::Substream& k_stream,
                                    const rng::Substream& z_stream, double band_scale = 0.5,
                                    double k_mark_alpha = 1.0);

// General construction: time-change x and d by the inverse of <m, m>, then
// run the same sweep-and-flip pipeline on the changed paths.  The local time
// estimate switches to the occupation form (band dt^0.4) because the changed
// path is only available through its values.  truncated is set when the
// terminal quadratic variation runs out before the horizon.
SkewBuild skew_solution_general(const Decomposition& x, const SamplePath& d, double alpha,
                                const rng::Substream& k_stream,
                                const rng::Substream& z_stream, double band_scale = 0.5,
                                double k_mark_alpha = 1.0);

SkewBuild skew_solution_general_inhom(const Decomposition& x, const SamplePath& d,
                                      const PiecewiseAlpha& pieces,
                                      const rng::Substream& k_stream,
                                      const rng::Substream& z_stream, double band_scale = 0.5,
                                      double k_mark_alpha = 1.0);

// W = integral of a symmetric (alpha = 1/2) half-open flip of x_abs against
// x_abs with its zero band snapped to 0.  Each excursion's contribution
// telescopes, so |W| equals the snapped path exactly and differs from x_abs
// by at most the band (when x_abs starts inside the band).
SamplePath companion_W_from_abs(const SamplePath& x_abs, const rng::Substream& stream,
                                double band_scale = 0.5);

}  // namespace sigmar
