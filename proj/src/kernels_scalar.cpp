#include "sigmar/kernels.hpp"
#include "sigmar/kernels/lane.hpp"
#include "sigmar/kernels/philox.hpp"
#include "sigmar/kernels/body.inl"

// Portable backend.  This translation unit is built without target-specific
// flags and with -ffp-contract=off, so its arithmetic is plain IEEE doubles
// plus explicit std::fma, matching the AVX2 lanes operation for operation.

namespace sigmar::kernels::scalar_impl {

void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out) {
    for (std::size_t j = 0; j < npairs; ++j) {
        std::uint64_t a, b;
        detail::philox_u64s(key, block0 + j, 0, a, b);
        double g0, g1;
        body::gauss_from_u64<ScalarLane>(a, b, g0, g1);
        out[2 * j] = g0;
        out[2 * j + 1] = g1;
    }
}

void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out) {
    for (std::size_t j = 0; j < npairs; ++j) {
        std::uint64_t a, b;
        detail::philox_u64s(key, block0 + j, 0, a, b);
        out[2 * j] = body::to_unit_lane<ScalarLane>(a);
        out[2 * j + 1] = body::to_unit_lane<ScalarLane>(b);
    }
}

void tanaka_terms(const double* x, std::size_t n_steps, double* out) {
    for (std::size_t j = 0; j < n_steps; ++j)
        out[j] = body::tanaka_term<ScalarLane>(x[j], x[j + 1]);
}

void squared_increments(const double* x, std::size_t n_steps, double* out) {
    for (std::size_t j = 0; j < n_steps; ++j) {
        double d = x[j + 1] - x[j];
        out[j] = d * d;
    }
}

}  // namespace sigmar::kernels::scalar_impl
