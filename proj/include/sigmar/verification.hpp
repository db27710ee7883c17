#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sigmar/constructors.hpp"

namespace sigmar {

// One reported line: a named statistic against its tolerance.  Rows with
// asserted == false are descriptive only; they never fail a report.
struct CheckRow {
    std::string check;
    std::string statistic;
    double value = 0.0;
    double tolerance = 0.0;
    bool asserted = true;
    bool pass = true;
    std::string note;
};

// Result of one verification operation: identification, the parameters it
// ran with, and its check rows.  passed() is the conjunction of the
// asserted rows; descriptive rows ride along without voting.
struct VerificationReport {
    std::string name;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::string parameters;
    std::vector<CheckRow> rows;

    bool passed() const;
    CheckRow& assert_row(std::string check, std::string statistic, double value,
                         double tolerance, bool pass);
    CheckRow& describe(std::string check, std::string statistic, double value,
                       std::string note = {});
};

// Closed index window [a, b]; the tested increment is path[b] - path[a].
struct Window {
    std::size_t a = 0;
    std::size_t b = 0;
};

// count equal-width windows tiling [0, n_steps].
std::vector<Window> uniform_windows(std::size_t n_steps, std::size_t count);

// Ensembles are pulled path by path so nothing holds N full paths at once.
// Sources must be pure: path i is the same no matter when or where it is
// generated, which also keeps multi-threaded runs byte-identical.
using PathSource = std::function<SamplePath(std::size_t)>;
using MaskSource = std::function<std::vector<unsigned char>(std::size_t)>;
using BuildSource = std::function<SkewBuild(std::size_t)>;
using DecSource = std::function<Decomposition(std::size_t)>;

// Stop mask for censored windows: flags every index inside the carrier's
// band plus the right endpoint of every sign-changing step.  Both conditions
// are decided by values up to the flagged index, so "first flagged index" is
// a bona fide stopping rule along the discrete path.
std::vector<unsigned char> censor_mask(const SamplePath& carrier, double band);

// Window z-tests for centered increments: each window passes when |z| stays
// under the two-sided significance split evenly across all windows.  A mask
// source censors each window at its first flagged index (inclusive), so
// increments are collected only while the carrier stays clear; build masks
// with censor_mask so the stop is adapted and the censored martingale mean
// stays exactly centered.  Windows that open inside the band on fewer than
// 20 paths are reported as inconclusive instead of scored, as is an empty
// window list.
VerificationReport martingale_increment_test(std::size_t n_paths, const PathSource& paths,
                                             const std::vector<Window>& windows,
                                             const MaskSource& masks = {},
                                             double significance = 0.01);

// Brownianity scoring of an ensemble: mean terminal quadratic variation
// against the horizon, KS distance of pooled normalized increments against
// the standard Gaussian, and window z-tests at the given significance.  The
// increment pool is strided down to at most 2^23 values, deterministically
// by global index.
VerificationReport driver_brownianity(std::size_t n_paths, const PathSource& paths,
                                      std::string name = "driver_brownianity",
                                      double significance = 0.01);

// Reconstructs the driver W = Y - integral of (2 alpha - 1) dL from each
// build and runs the Brownianity scoring on it.  At alpha = 0.5 the
// subtraction vanishes term by term, so the rows coincide bit for bit with
// driver_brownianity on the outputs themselves.
VerificationReport sde_residual_skew(std::size_t n_paths, const BuildSource& builds,
                                     double alpha, double significance = 0.01);
VerificationReport sde_residual_skew(std::size_t n_paths, const BuildSource& builds,
                                     const PiecewiseAlpha& pieces, double significance = 0.01);

// Terminal local time both ways on each path: the Tanaka estimator against
// its exact Gaussian mean sqrt(2/pi) (tolerance 0.03, pure sampling width),
// and the median relative gap to the occupation estimator at window
// eps = dt^eps_exponent (tolerance 0.10).  The gap carries an O(sqrt(eps))
// boundary bias, so the second check genuinely tightens only with the grid.
VerificationReport local_time_cross_check(std::size_t n_paths, const PathSource& paths,
                                          double eps_exponent = 0.4);

// Empirical P(Y_t > 0) against alpha(t) at each probe time, counting only
// paths with Y_t off the zero band; gated at 3 sigma binomial.  Probes with
// fewer than 100 usable paths come back inconclusive.
VerificationReport occupation_fraction_test(std::size_t n_paths, const BuildSource& builds,
                                            double alpha, const std::vector<double>& probes);
VerificationReport occupation_fraction_test(std::size_t n_paths, const BuildSource& builds,
                                            const PiecewiseAlpha& pieces,
                                            const std::vector<double>& probes);

// Sizing of one nested Monte Carlo run: freeze every outer path at t_freeze
// and average n_in inner continuations simulated from the frozen value.
// Probes:
//   abs_bm      reflected Brownian motion, the clean optional-stopping case
//   skew_delta  the geometric skew build, exercising the correction term
//   plain_bm    (gamma check only) empty carrier set, plain martingale pull
struct NestedMCSpec {
    std::size_t n_out = 100;
    std::size_t n_in = 1000;
    double t_freeze = 0.5;
    std::string probe = "abs_bm";
    TimeGrid grid{1024, 1.0};
    std::uint64_t seed = 1;
    double delta = 0.6;      // skew_delta probe only
    double min_level = 0.1;  // outer paths with |X_T| <= this are excluded
};

void validate(const NestedMCSpec& spec);

// Recovers X_T as the inner average of X_horizon over continuations with no
// zero of X after T, plus the finite-variation correction taken when the
// carrier set of D is revisited.  Zero passages inside a step are resolved
// by sampling the Brownian-bridge crossing probability, which removes the
// O(sqrt(dt)) detection bias.  Reports the mean relative error over the
// retained outer paths and its CI.
VerificationReport representation_check_g(const NestedMCSpec& spec);

// Mirror image keyed to the zeros of D instead of the zeros of X.  The
// skew_delta probe is reported without assertion: the identity needs the
// process to vanish on the carrier set, which that build does not, so the
// systematic residual is surfaced rather than scored.
VerificationReport representation_check_gamma(const NestedMCSpec& spec);

// Feeds the f-transform companions of an ensemble to the window z-tests,
// with each path's windows restricted away from the carrier band of its D
// (pass restrict_windows = false to score every window).
VerificationReport characterization_martingale_test(std::size_t n_paths, const DecSource& xs,
                                                    const RegisteredFn& f,
                                                    std::size_t window_count = 8,
                                                    bool restrict_windows = true,
                                                    double significance = 0.01);

// Estimates both sides of the last-passage tail identity
// P[g_k - gamma > T] vs 1 ^ (M_{T+gamma}/k) on horizon-stopped reflected
// Brownian paths.  The identity's hypotheses (M vanishing at infinity) do
// not hold on a finite horizon, so both sides are reported with CIs and
// never asserted against each other.
VerificationReport conditional_tail_estimator(const NestedMCSpec& spec, double level_k,
                                              double t_offset);

}  // namespace sigmar
