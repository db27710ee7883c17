#pragma once

#include <string>
#include <vector>

#include "sigmar/path_engine.hpp"

namespace sigmar {

// Where the variation of a finite-variation path lives relative to a carrier's
// zero band.  A step counts as inside when either endpoint is in the band or
// the carrier changes sign across it.
struct CarrierReport {
    double total_mass = 0.0;
    double outside_mass = 0.0;
    double fraction_outside = 0.0;
    std::string carrier_desc;
};

// Left-point Riemann sum, cumulative from 0.
SamplePath ito_integral(const SamplePath& integrand, const SamplePath& integrator);

// t -> k[g_t] * y[t] with g_t the last zero of y at or before t.
SamplePath balayage_transform(const SamplePath& k, const SamplePath& y, const ExcursionSet& exc_y);

// Finite-variation remainder of the swept process:
// R_t = k[g_t] y_t - k[g_0] y_0 - (left-lagged k.g integrated against y).
SamplePath residual_R(const SamplePath& k, const SamplePath& y, const ExcursionSet& exc_y);

CarrierReport carrier_check(const SamplePath& fv, const SamplePath& carrier, double band);

// 0/1 indicator path that is 0 exactly on the masked set; stands in for a
// carrier when the natural one is a union of zero sets (any band below 1
// works on it).
SamplePath mask_path(const TimeGrid& grid, const std::vector<unsigned char>& mask,
                     std::string role = "carrier");

std::vector<unsigned char> mask_union(const std::vector<unsigned char>& a,
                                      const std::vector<unsigned char>& b);

}  // namespace sigmar
