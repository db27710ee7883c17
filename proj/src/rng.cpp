#include "sigmar/rng.hpp"

#include "sigmar/kernels.hpp"

namespace sigmar::rng {

void Substream::fill_gaussians(std::size_t count, double* out,
                               std::uint64_t block0) const {
    const std::size_t npairs = count / 2;
    kernels::fill_gaussian_pairs(key, block0, npairs, out);
    if (count % 2 != 0) {
        double g0, g1;
        kernels::gaussian_pair(key, block0 + npairs, 0, g0, g1);
        out[count - 1] = g0;
    }
}

std::vector<double> Substream::gaussians(std::size_t count,
                                         std::uint64_t block0) const {
    std::vector<double> out(count);
    fill_gaussians(count, out.data(), block0);
    return out;
}

double Substream::uniform(std::uint64_t block, std::uint64_t sub) const {
    std::uint64_t a, b;
    kernels::philox_u64_pair(key, block, sub, a, b);
    return kernels::to_unit(a);
}

int Substream::bernoulli_pm(std::uint64_t block, std::uint64_t sub,
                            double p) const {
    return uniform(block, sub) < p ? 1 : -1;
}

}  // namespace sigmar::rng
