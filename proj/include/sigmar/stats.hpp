#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sigmar::stats {

// Standard normal CDF through erfc, accurate in both tails.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Inverse of norm_cdf by bisection.  Thresholds here are far from the
// extreme tails, so 200 halvings of [-12, 12] are more than enough.
double norm_quantile(double p);

// CDF of the arcsine law for the last zero before t0 of a Brownian motion:
// P(g <= s) = (2/pi) asin(sqrt(s/t0)) for s in [0, t0].
double arcsine_cdf(double s, double t0);

// Kolmogorov-Smirnov distance between the empirical law of `sample` and a
// continuous CDF.  Sorts its private copy.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(f - static_cast<double>(i) / n,
                                 static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// KS distance against a centered normal with standard deviation sd.
double ks_vs_normal(std::vector<double> sample, double sd);

// Welford running mean/variance.
struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    // Sample (n-1) variance; 0 until two points are seen.
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double sd() const { return std::sqrt(variance()); }
    // Standard error of the mean.
    double sem() const { return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

// Standard deviation of a binomial proportion estimate.
inline double binom_sigma(double p, std::size_t n) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Self-normalized z-score of a sum of centered increments:
// z = sum(x) / sqrt(sum(x^2)).  Near-N(0,1) for martingale increments.
inline double self_normalized_z(double sum, double sumsq) {
    return sumsq > 0.0 ? sum / std::sqrt(sumsq) : 0.0;
}

// Median of a sample (average of middle pair for even sizes); sorts a copy.
double median(std::vector<double> sample);

}  // namespace sigmar::stats
