#include "sigmar/stats.hpp"

namespace sigmar::stats {

double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("norm_quantile: p must lie strictly in (0,1)");
    double lo = -12.0, hi = 12.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (norm_cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double arcsine_cdf(double s, double t0) {
    if (!(t0 > 0.0)) throw std::invalid_argument("arcsine_cdf: t0 must be positive");
    if (s <= 0.0) return 0.0;
    if (s >= t0) return 1.0;
    return (2.0 / M_PI) * std::asin(std::sqrt(s / t0));
}

double ks_vs_normal(std::vector<double> sample, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("ks_vs_normal: sd must be positive");
    return ks_distance(std::move(sample), [sd](double x) { return norm_cdf(x / sd); });
}

double median(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    return n % 2 == 1 ? sample[n / 2] : 0.5 * (sample[n / 2 - 1] + sample[n / 2]);
}

}  // namespace sigmar::stats
