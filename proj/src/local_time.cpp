#include "sigmar/local_time.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "sigmar/kernels.hpp"

namespace sigmar {

LocalTimeEstimate local_time_tanaka(const SamplePath& x) {
    LocalTimeEstimate est;
    est.method = "tanaka";
    est.l = SamplePath(x.grid, "local_time");
    if (x.size() < 2) return est;
    std::vector<double> terms(x.size() - 1);
    kernels::tanaka_terms(x.values.data(), terms.size(), terms.data());
    double acc = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        double t = terms[i];
        if (t < 0.0) {
            est.clamp_mass -= t;
            t = 0.0;
        }
        acc += t;
        est.l.values[i + 1] = acc;
    }
    return est;
}

LocalTimeEstimate local_time_occupation(const SamplePath& x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("local_time_occupation: eps must be positive");
    LocalTimeEstimate est;
    est.method = "occupation";
    est.eps = eps;
    est.l = SamplePath(x.grid, "local_time");
    if (x.size() < 2) return est;
    std::vector<double> sq(x.size() - 1);
    kernels::squared_increments(x.values.data(), sq.size(), sq.data());
    const double scale = 1.0 / (2.0 * eps);
    double acc = 0.0;
    for (std::size_t i = 0; i < sq.size(); ++i) {
        if (std::fabs(x[i]) <= eps) acc += scale * sq[i];
        est.l.values[i + 1] = acc;
    }
    return est;
}

}  // namespace sigmar
