#include "sigmar/kernels.hpp"
#include "sigmar/kernels/lane.hpp"
#include "sigmar/kernels/philox.hpp"
#include "sigmar/kernels/body.inl"

#include <cstdlib>
#include <cstring>

namespace sigmar::kernels {

namespace {

Backend pick_backend() {
    if (const char* env = std::getenv("SIGMAR_BACKEND")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_impl::available())
            return Backend::avx2;
        // Unknown value or unavailable backend: fall through to detection.
    }
    return avx2_impl::available() ? Backend::avx2 : Backend::scalar;
}

}  // namespace

Backend active_backend() {
    static const Backend b = pick_backend();
    return b;
}

const char* backend_name() {
    return active_backend() == Backend::avx2 ? "avx2" : "scalar";
}

void philox_block(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                  std::uint32_t out[4]) {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(block),
        static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(sub),
        static_cast<std::uint32_t>(sub >> 32),
    };
    detail::philox4x32_10(c, static_cast<std::uint32_t>(key),
                          static_cast<std::uint32_t>(key >> 32));
    out[0] = c[0];
    out[1] = c[1];
    out[2] = c[2];
    out[3] = c[3];
}

void philox_u64_pair(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                     std::uint64_t& a, std::uint64_t& b) {
    detail::philox_u64s(key, block, sub, a, b);
}

double to_unit(std::uint64_t u) { return body::to_unit_lane<ScalarLane>(u); }

double log_unit(double u) { return body::log_core<ScalarLane>(u); }

void sincos_2pi(double u, double& c, double& s) {
    body::sincos_core<ScalarLane>(u, c, s);
}

void gaussian_pair(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                   double& g0, double& g1) {
    std::uint64_t a, b;
    detail::philox_u64s(key, block, sub, a, b);
    body::gauss_from_u64<ScalarLane>(a, b, g0, g1);
}

void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out) {
    if (active_backend() == Backend::avx2)
        avx2_impl::fill_gaussian_pairs(key, block0, npairs, out);
    else
        scalar_impl::fill_gaussian_pairs(key, block0, npairs, out);
}

void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out) {
    if (active_backend() == Backend::avx2)
        avx2_impl::fill_uniform_pairs(key, block0, npairs, out);
    else
        scalar_impl::fill_uniform_pairs(key, block0, npairs, out);
}

void tanaka_terms(const double* x, std::size_t n_steps, double* out) {
    if (active_backend() == Backend::avx2)
        avx2_impl::tanaka_terms(x, n_steps, out);
    else
        scalar_impl::tanaka_terms(x, n_steps, out);
}

void squared_increments(const double* x, std::size_t n_steps, double* out) {
    if (active_backend() == Backend::avx2)
        avx2_impl::squared_increments(x, n_steps, out);
    else
        scalar_impl::squared_increments(x, n_steps, out);
}

}  // namespace sigmar::kernels
