#pragma once

#include <string>

#include "sigmar/path_engine.hpp"

namespace sigmar {

struct LocalTimeEstimate {
    SamplePath l;
    std::string method;       // "tanaka" | "occupation"
    double eps = 0.0;         // occupation band; 0 for tanaka
    double clamp_mass = 0.0;  // negative-increment mass removed to keep l nondecreasing
};

// Per-step symmetric Tanaka increments |x1| - |x0| - sign(x0) dx with
// sign(0) = 0, accumulated and clamped nondecreasing.  The discrete terms are
// never negative under this convention, so the clamp mass stays 0; it is
// computed anyway and reported.
LocalTimeEstimate local_time_tanaka(const SamplePath& x);

// Occupation estimator: (1/2eps) sum of squared increments started inside
// the band |x| <= eps.
LocalTimeEstimate local_time_occupation(const SamplePath& x, double eps);

}  // namespace sigmar
