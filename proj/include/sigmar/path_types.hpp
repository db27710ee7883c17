#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sigmar {

// Uniform grid over [0, horizon] with n_steps + 1 points; point k sits at k*dt.
struct TimeGrid {
    std::size_t n_steps = 0;
    double horizon = 1.0;

    double dt() const { return horizon / static_cast<double>(n_steps); }
    std::size_t size() const { return n_steps + 1; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

    bool operator==(const TimeGrid& o) const {
        return n_steps == o.n_steps && horizon == o.horizon;
    }
    bool operator!=(const TimeGrid& o) const { return !(*this == o); }
};

inline void validate_grid(const TimeGrid& g) {
    if (g.n_steps == 0) throw std::invalid_argument("TimeGrid: n_steps must be positive");
    if (!(g.horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
}

// One realized path on a grid.  The role tag is a free-form label used in
// dumps and diagnostics ("B", "W", "X", "local_time", ...).
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;
    std::string role;

    SamplePath() = default;
    explicit SamplePath(TimeGrid g, std::string r = {})
        : grid(g), values(g.size(), 0.0), role(std::move(r)) {}
    SamplePath(TimeGrid g, std::vector<double> v, std::string r = {})
        : grid(g), values(std::move(v)), role(std::move(r)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SamplePath: values length does not match grid");
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    double front() const { return values.front(); }
    double back() const { return values.back(); }
    bool empty() const { return values.empty(); }
};

inline void require_same_grid(const SamplePath& a, const SamplePath& b, const char* what) {
    if (a.grid != b.grid)
        throw std::invalid_argument(std::string(what) + ": paths live on different grids");
}

// Index of the first NaN/Inf entry, or size() if the path is clean.
inline std::size_t first_non_finite(const SamplePath& p) {
    for (std::size_t i = 0; i < p.values.size(); ++i)
        if (!std::isfinite(p.values[i])) return i;
    return p.values.size();
}

// Thrown when a simulated or derived path contains NaN/Inf; carries enough
// context for the cli's diagnostic exit path.
struct NonFiniteError : std::runtime_error {
    std::size_t path_index;
    std::size_t value_index;
    NonFiniteError(std::size_t path, std::size_t at, const std::string& role)
        : std::runtime_error("non-finite value in path " + std::to_string(path) +
                             " (role '" + role + "') at index " + std::to_string(at)),
          path_index(path), value_index(at) {}
};

}  // namespace sigmar
