#include "weakmeter/fit.hpp"

#include <cmath>

#include "weakmeter/errors.hpp"

namespace weakmeter {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DegenerateFit("need at least two paired points for a slope");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw DegenerateFit("log-log fit needs strictly positive values");
        }
        sx += std::log(x[i]);
        sy += std::log(y[i]);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y[i]) - my);
    }
    if (sxx <= 1e-24) {
        throw DegenerateFit("abscissae have no spread");
    }
    return sxy / sxx;
}

}  // namespace weakmeter
