#pragma once

#include <cstddef>
#include <cstdint>

// Numeric kernels behind the generator and the per-step path transforms.
// Two backends exist: a portable scalar one and an AVX2 one selected at
// runtime when the CPU supports it.  The backends are contractually
// bit-identical; tests/test_kernels.cpp enforces exact equality, so results
// never depend on which machine ran the job.  Set SIGMAR_BACKEND=scalar (or
// =avx2) in the environment to force a choice.

namespace sigmar::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name();

// Philox4x32-10 counter-based generator.  One 128-bit block per (key, block,
// sub) triple; the four 32-bit words are packed into two 64-bit outputs.
void philox_block(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                  std::uint32_t out[4]);
void philox_u64_pair(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                     std::uint64_t& a, std::uint64_t& b);

// Maps a 64-bit word to the open interval (0,1): ((u >> 12) + 0.5) * 2^-52.
// Every step is exact in double arithmetic, so the value is reproducible
// bit for bit from the integer alone.
double to_unit(std::uint64_t u);

// out receives 2*npairs standard Gaussians via Box-Muller on consecutive
// blocks [block0, block0 + npairs) of the keyed stream.
void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out);

// out receives 2*npairs unit uniforms from the same block layout.
void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out);

// out[j] = |x[j+1]| - |x[j]| - sgn(x[j])*(x[j+1] - x[j]) with sgn(0) = 0,
// for j in [0, n_steps).  These are the per-step terms of the symmetric
// discrete Tanaka identity; callers prefix-sum them.
void tanaka_terms(const double* x, std::size_t n_steps, double* out);

// out[j] = (x[j+1] - x[j])^2 for j in [0, n_steps).
void squared_increments(const double* x, std::size_t n_steps, double* out);

// Scalar reference entries for the transcendental cores, used by tests and
// by single-value draws.  log_unit requires a positive normal double.
double log_unit(double x);
void sincos_2pi(double u, double& c, double& s);

// One Box-Muller pair from the block at (key, block, sub).  Scalar path;
// identical to the pair the bulk fill writes for that block.
void gaussian_pair(std::uint64_t key, std::uint64_t block, std::uint64_t sub,
                   double& g0, double& g1);

// Direct backend access, used by the equivalence tests.  scalar_impl is
// always compiled; avx2_impl::available() reports false when the binary was
// built without AVX2 support or the CPU lacks it.
namespace scalar_impl {
void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out);
void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out);
void tanaka_terms(const double* x, std::size_t n_steps, double* out);
void squared_increments(const double* x, std::size_t n_steps, double* out);
}  // namespace scalar_impl

namespace avx2_impl {
bool available();
void fill_gaussian_pairs(std::uint64_t key, std::uint64_t block0,
                         std::size_t npairs, double* out);
void fill_uniform_pairs(std::uint64_t key, std::uint64_t block0,
                        std::size_t npairs, double* out);
void tanaka_terms(const double* x, std::size_t n_steps, double* out);
void squared_increments(const double* x, std::size_t n_steps, double* out);
}  // namespace avx2_impl

}  // namespace sigmar::kernels
