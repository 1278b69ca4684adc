#pragma once

#include <span>

namespace weakmeter {

/// Least-squares slope of log(y) against log(x).
/// Throws DegenerateFit when any value is non-positive or all x coincide.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace weakmeter
