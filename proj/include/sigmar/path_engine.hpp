#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sigmar/path_types.hpp"
#include "sigmar/rng.hpp"

namespace sigmar {

// One maximal excursion away from the zero band.  g and d are grid indices:
// the path sits inside the band at g and d and strictly outside in between,
// except when the excursion runs into a grid boundary (clipped flags).
struct Interval {
    std::size_t g = 0;
    std::size_t d = 0;
    bool clipped_left = false;
    bool clipped_right = false;
};

struct ExcursionSet {
    std::vector<Interval> intervals;
    double zero_tol = 0.0;
    // mask[i] = 1 where index i counts as a zero of the source path.
    std::vector<unsigned char> mask;
};

// Last-zero / next-zero answers for one query index.  Sentinel for d is the
// final grid index; sup over an empty set is index 0 with g_exists = false.
struct HonestTimeQuery {
    std::size_t t_index = 0;
    std::size_t g_index = 0;
    bool g_exists = false;
    std::size_t d_index = 0;
    bool d_is_sentinel = false;
    std::size_t g_horizon_index = 0;
    bool g_horizon_exists = false;
};

struct TimeChangeResult {
    std::size_t index = 0;
    bool truncated = false;
};

// Exact Gaussian increments, variance dt, scaled from the substream's
// counter-addressed draws.  A grid with n_steps == 0 degenerates to the
// single point x0.  path_index only labels diagnostics on non-finite draws.
SamplePath simulate_brownian(const TimeGrid& grid, const rng::Substream& stream, double x0,
                             std::string role = "B", std::size_t path_index = 0);

// Zero detection used everywhere: index i is a zero when |v[i]| <= zero_tol,
// and every sign change across a step additionally assigns the crossing to
// the endpoint of smaller magnitude (earlier on tie).
std::vector<unsigned char> zero_mask(const SamplePath& path, double zero_tol);

ExcursionSet detect_excursions(const SamplePath& path, double zero_tol);

// lz[j] = largest masked index <= j, or 0 when no zero precedes j (sup of an
// empty set is 0 by convention).
std::vector<std::size_t> last_zero_indices(const ExcursionSet& exc);

HonestTimeQuery honest_times(const ExcursionSet& exc, std::size_t t_index);

// Cumulative sum of squared increments, role "qv".
SamplePath quadratic_variation(const SamplePath& path);

// Smallest index k with qv[k] > t; clamps to the last index with the
// truncated flag when the terminal QV never exceeds t.
TimeChangeResult time_change(const SamplePath& qv, double t);

// Doubles the grid by inserting Brownian-bridge midpoints: the midpoint of
// each step is Gaussian with mean the endpoint average and variance dt/4.
SamplePath bridge_refine(const SamplePath& path, const rng::Substream& stream);

}  // namespace sigmar
