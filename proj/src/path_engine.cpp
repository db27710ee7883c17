#include "sigmar/path_engine.hpp"

#include <cmath>
#include <stdexcept>

#include "sigmar/kernels.hpp"

namespace sigmar {

SamplePath simulate_brownian(const TimeGrid& grid, const rng::Substream& stream, double x0,
                             std::string role, std::size_t path_index) {
    SamplePath p(grid, std::move(role));
    p.values[0] = x0;
    if (grid.n_steps == 0) return p;

    const double sd = std::sqrt(grid.dt());
    std::vector<double> g = stream.gaussians(grid.n_steps);
    double acc = x0;
    for (std::size_t i = 0; i < grid.n_steps; ++i) {
        acc += sd * g[i];
        p.values[i + 1] = acc;
    }
    const std::size_t bad = first_non_finite(p);
    if (bad < p.size()) throw NonFiniteError(path_index, bad, p.role);
    return p;
}

std::vector<unsigned char> zero_mask(const SamplePath& path, double zero_tol) {
    if (zero_tol < 0.0) throw std::invalid_argument("zero_mask: zero_tol must be >= 0");
    const std::size_t n = path.size();
    std::vector<unsigned char> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (std::fabs(path[i]) <= zero_tol) mask[i] = 1;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a = path[i], b = path[i + 1];
        if ((a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)) {
            // crossing inside the step: charge the endpoint nearer zero
            if (std::fabs(b) < std::fabs(a))
                mask[i + 1] = 1;
            else
                mask[i] = 1;
        }
    }
    return mask;
}

ExcursionSet detect_excursions(const SamplePath& path, double zero_tol) {
    ExcursionSet out;
    out.zero_tol = zero_tol;
    out.mask = zero_mask(path, zero_tol);
    const std::size_t n = out.mask.size();
    std::size_t i = 0;
    while (i < n) {
        if (out.mask[i]) {
            ++i;
            continue;
        }
        std::size_t a = i;
        while (i < n && !out.mask[i]) ++i;
        const std::size_t b = i - 1;  // run [a, b] strictly outside the band
        Interval iv;
        iv.clipped_left = (a == 0);
        iv.clipped_right = (b == n - 1);
        iv.g = iv.clipped_left ? a : a - 1;
        iv.d = iv.clipped_right ? b : b + 1;
        out.intervals.push_back(iv);
    }
    return out;
}

std::vector<std::size_t> last_zero_indices(const ExcursionSet& exc) {
    std::vector<std::size_t> lz(exc.mask.size(), 0);
    std::size_t last = 0;
    for (std::size_t j = 0; j < exc.mask.size(); ++j) {
        if (exc.mask[j]) last = j;
        lz[j] = last;
    }
    return lz;
}

HonestTimeQuery honest_times(const ExcursionSet& exc, std::size_t t_index) {
    const std::size_t n = exc.mask.size();
    if (t_index >= n) throw std::invalid_argument("honest_times: index beyond grid");
    HonestTimeQuery q;
    q.t_index = t_index;
    q.g_index = 0;
    for (std::size_t j = 0; j <= t_index; ++j)
        if (exc.mask[j]) {
            q.g_index = j;
            q.g_exists = true;
        }
    q.d_index = n - 1;
    q.d_is_sentinel = true;
    for (std::size_t j = t_index + 1; j < n; ++j)
        if (exc.mask[j]) {
            q.d_index = j;
            q.d_is_sentinel = false;
            break;
        }
    q.g_horizon_index = 0;
    for (std::size_t j = 0; j < n; ++j)
        if (exc.mask[j]) {
            q.g_horizon_index = j;
            q.g_horizon_exists = true;
        }
    return q;
}

SamplePath quadratic_variation(const SamplePath& path) {
    SamplePath qv(path.grid, "qv");
    if (path.size() < 2) return qv;
    std::vector<double> sq(path.size() - 1);
    kernels::squared_increments(path.values.data(), sq.size(), sq.data());
    double acc = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        acc += sq[i];
        qv.values[i + 1] = acc;
    }
    return qv;
}

TimeChangeResult time_change(const SamplePath& qv, double t) {
    if (t < 0.0) throw std::invalid_argument("time_change: t must be >= 0");
    TimeChangeResult r;
    for (std::size_t k = 0; k < qv.size(); ++k) {
        if (qv[k] > t) {
            r.index = k;
            return r;
        }
    }
    r.index = qv.size() - 1;
    r.truncated = true;
    return r;
}

SamplePath bridge_refine(const SamplePath& path, const rng::Substream& stream) {
    const std::size_t n = path.grid.n_steps;
    if (n == 0) return path;
    TimeGrid fine{2 * n, path.grid.horizon};
    SamplePath out(fine, path.role);
    const double half_sd = 0.5 * std::sqrt(path.grid.dt());
    std::vector<double> g = stream.gaussians(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[2 * i] = path[i];
        out.values[2 * i + 1] = 0.5 * (path[i] + path[i + 1]) + half_sd * g[i];
    }
    out.values[2 * n] = path[n];
    return out;
}

}  // namespace sigmar
