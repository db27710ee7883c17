#include "sigmar/flip.hpp"

#include <stdexcept>

namespace sigmar {

std::size_t PiecewiseAlpha::piece_index(double t) const {
    std::size_t i = 0;
    while (i + 1 < breakpoints.size() && breakpoints[i + 1] <= t) ++i;
    return i;
}

void validate_pieces(const PiecewiseAlpha& pieces) {
    if (pieces.breakpoints.empty() || pieces.breakpoints.size() != pieces.values.size())
        throw std::invalid_argument("PiecewiseAlpha: breakpoints and values must match and be nonempty");
    if (pieces.breakpoints[0] != 0.0)
        throw std::invalid_argument("PiecewiseAlpha: first breakpoint must be 0");
    for (std::size_t i = 0; i + 1 < pieces.breakpoints.size(); ++i)
        if (!(pieces.breakpoints[i] < pieces.breakpoints[i + 1]))
            throw std::invalid_argument("PiecewiseAlpha: breakpoints must increase strictly");
    for (double a : pieces.values)
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("PiecewiseAlpha: values must lie in [0,1]");
}

SignAssignment assign_signs(const ExcursionSet& exc, double alpha, const rng::Substream& stream) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("assign_signs: alpha must lie in [0,1]");
    SignAssignment s;
    s.alpha = alpha;
    s.marks.resize(exc.intervals.size());
    for (std::size_t n = 0; n < s.marks.size(); ++n)
        s.marks[n] = stream.bernoulli_pm(n, 0, alpha);
    return s;
}

namespace {

// Interior of excursion n as a closed index run [a, b]; clipped ends put the
// grid boundary itself inside the excursion.
void interior_run(const Interval& iv, std::size_t& a, std::size_t& b) {
    a = iv.clipped_left ? iv.g : iv.g + 1;
    b = iv.clipped_right ? iv.d : iv.d - 1;
}

void require_match(const ExcursionSet& exc, std::size_t marks, const SamplePath& y) {
    if (exc.intervals.size() != marks)
        throw std::invalid_argument("flip: mark count does not match excursion count");
    if (exc.mask.size() != y.size())
        throw std::invalid_argument("flip: excursion set was built on a different grid");
}

}  // namespace

SamplePath z_process(const SamplePath& y, const ExcursionSet& exc, const SignAssignment& signs) {
    require_match(exc, signs.marks.size(), y);
    SamplePath z(y.grid, "Z");
    for (std::size_t n = 0; n < exc.intervals.size(); ++n) {
        std::size_t a, b;
        interior_run(exc.intervals[n], a, b);
        for (std::size_t j = a; j <= b; ++j) z.values[j] = signs.marks[n];
    }
    return z;
}

SamplePath k_process(const SamplePath& y, const ExcursionSet& exc, const SignAssignment& signs) {
    SamplePath k = z_process(y, exc, signs);
    k.role = "K";
    for (std::size_t n = 0; n < exc.intervals.size(); ++n) {
        const Interval& iv = exc.intervals[n];
        if (!iv.clipped_left) k.values[iv.g] = signs.marks[n];
    }
    return k;
}

namespace {

SamplePath flip_inhom(const SamplePath& y, const ExcursionSet& exc,
                      const InhomSignAssignment& marks, bool half_open, const char* role) {
    require_match(exc, exc.intervals.size(), y);
    validate_pieces(marks.pieces);
    SamplePath z(y.grid, role);
    for (std::size_t n = 0; n < exc.intervals.size(); ++n) {
        std::size_t a, b;
        interior_run(exc.intervals[n], a, b);
        if (half_open && !exc.intervals[n].clipped_left) a = exc.intervals[n].g;
        for (std::size_t j = a; j <= b; ++j) {
            const std::size_t i = marks.pieces.piece_index(y.grid.time(j));
            z.values[j] = marks.mark(n, i);
        }
    }
    return z;
}

}  // namespace

SamplePath z_process_inhom(const SamplePath& y, const ExcursionSet& exc,
                           const InhomSignAssignment& marks) {
    return flip_inhom(y, exc, marks, false, "Z");
}

SamplePath k_process_inhom(const SamplePath& y, const ExcursionSet& exc,
                           const InhomSignAssignment& marks) {
    return flip_inhom(y, exc, marks, true, "K");
}

SamplePath apply_flip(const SamplePath& flip, const SamplePath& y) {
    require_same_grid(flip, y, "apply_flip");
    SamplePath out(y.grid, "Y");
    for (std::size_t j = 0; j < y.size(); ++j) out.values[j] = flip[j] * y[j];
    return out;
}

}  // namespace sigmar
