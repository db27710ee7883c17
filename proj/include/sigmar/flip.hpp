#pragma once

#include <cstddef>
#include <vector>

#include "sigmar/path_engine.hpp"
#include "sigmar/rng.hpp"

namespace sigmar {

// One Bernoulli mark per excursion, P(+1) = alpha.  Mark n is addressed at
// (block = n, sub = 0) in the stream, so a piecewise assignment with a single
// piece reproduces these marks bit for bit.
struct SignAssignment {
    std::vector<int> marks;
    double alpha = 0.5;
};

// Piecewise-constant alpha on cells [t_i, t_{i+1}); the last cell extends to
// the horizon.  breakpoints[0] must be 0.
struct PiecewiseAlpha {
    std::vector<double> breakpoints;
    std::vector<double> values;

    std::size_t piece_count() const { return values.size(); }
    // Largest i with breakpoints[i] <= t.
    std::size_t piece_index(double t) const;
};

void validate_pieces(const PiecewiseAlpha& pieces);

// Lazy marks for the inhomogeneous processes: the mark of excursion n on
// piece i is drawn at (block = n, sub = i), only when that pair is touched.
struct InhomSignAssignment {
    PiecewiseAlpha pieces;
    rng::Substream stream;

    int mark(std::size_t excursion, std::size_t piece) const {
        return stream.bernoulli_pm(excursion, piece, pieces.values[piece]);
    }
};

SignAssignment assign_signs(const ExcursionSet& exc, double alpha, const rng::Substream& stream);

// Open-interval flip process: mark strictly inside each excursion, 0 at both
// bracketing zeros and on the whole zero set.
SamplePath z_process(const SamplePath& y, const ExcursionSet& exc, const SignAssignment& signs);

// Half-open variant: also carries the mark at the left bracketing zero g_n.
SamplePath k_process(const SamplePath& y, const ExcursionSet& exc, const SignAssignment& signs);

SamplePath z_process_inhom(const SamplePath& y, const ExcursionSet& exc,
                           const InhomSignAssignment& marks);

SamplePath k_process_inhom(const SamplePath& y, const ExcursionSet& exc,
                           const InhomSignAssignment& marks);

// Pointwise product flip(t) * y(t).
SamplePath apply_flip(const SamplePath& flip, const SamplePath& y);

}  // namespace sigmar
