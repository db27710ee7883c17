#include "sigmar/balayage.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmar {

SamplePath ito_integral(const SamplePath& integrand, const SamplePath& integrator) {
    require_same_grid(integrand, integrator, "ito_integral");
    SamplePath out(integrand.grid, "integral");
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < integrator.size(); ++i) {
        acc += integrand[i] * (integrator[i + 1] - integrator[i]);
        out.values[i + 1] = acc;
    }
    return out;
}

SamplePath balayage_transform(const SamplePath& k, const SamplePath& y, const ExcursionSet& exc_y) {
    require_same_grid(k, y, "balayage_transform");
    if (exc_y.mask.size() != y.size())
        throw std::invalid_argument("balayage_transform: excursions from a different grid");
    const std::vector<std::size_t> lz = last_zero_indices(exc_y);
    SamplePath out(y.grid, "swept");
    for (std::size_t j = 0; j < y.size(); ++j) out.values[j] = k[lz[j]] * y[j];
    return out;
}

SamplePath residual_R(const SamplePath& k, const SamplePath& y, const ExcursionSet& exc_y) {
    SamplePath kg = balayage_transform(k, y, exc_y);
    const std::vector<std::size_t> lz = last_zero_indices(exc_y);
    SamplePath r(y.grid, "R");
    double integral = 0.0;
    for (std::size_t j = 1; j < y.size(); ++j) {
        // predictable projection of k.g over step j-1 -> j: value one grid
        // point to the left (k itself is constant between zeros)
        const std::size_t i = j - 1;
        const double kg_left = k[lz[i > 0 ? i - 1 : 0]];
        integral += kg_left * (y[j] - y[i]);
        r.values[j] = kg[j] - kg[0] - integral;
    }
    return r;
}

CarrierReport carrier_check(const SamplePath& fv, const SamplePath& carrier, double band) {
    require_same_grid(fv, carrier, "carrier_check");
    const std::vector<unsigned char> mask = zero_mask(carrier, band);
    CarrierReport rep;
    rep.carrier_desc = carrier.role + " band " + std::to_string(band);
    for (std::size_t i = 0; i + 1 < fv.size(); ++i) {
        const double dm = std::fabs(fv[i + 1] - fv[i]);
        rep.total_mass += dm;
        const bool sign_change = (carrier[i] > 0.0 && carrier[i + 1] < 0.0) ||
                                 (carrier[i] < 0.0 && carrier[i + 1] > 0.0);
        const bool inside = mask[i] || mask[i + 1] || sign_change;
        if (!inside) rep.outside_mass += dm;
    }
    rep.fraction_outside = rep.total_mass > 0.0 ? rep.outside_mass / rep.total_mass : 0.0;
    return rep;
}

SamplePath mask_path(const TimeGrid& grid, const std::vector<unsigned char>& mask,
                     std::string role) {
    SamplePath p(grid, std::move(role));
    if (mask.size() != p.size())
        throw std::invalid_argument("mask_path: mask length does not match grid");
    for (std::size_t j = 0; j < mask.size(); ++j) p.values[j] = mask[j] ? 0.0 : 1.0;
    return p;
}

std::vector<unsigned char> mask_union(const std::vector<unsigned char>& a,
                                      const std::vector<unsigned char>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mask_union: length mismatch");
    std::vector<unsigned char> u(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) u[i] = (a[i] || b[i]) ? 1 : 0;
    return u;
}

}  // namespace sigmar
