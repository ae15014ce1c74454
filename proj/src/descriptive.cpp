#include "levylab/descriptive.hpp"

#include <algorithm>
#include <cmath>

#include "levylab/error.hpp"

namespace levylab {

double mean(std::span<const double> x) {
    require(!x.empty(), Errc::insufficient_data, "mean of an empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    require(x.size() >= 2, Errc::insufficient_data, "variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    require(!sorted.empty(), Errc::insufficient_data, "quantile of an empty sample");
    require(p >= 0.0 && p <= 1.0, Errc::argument, "quantile level must lie in [0, 1]");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return sorted[lo] + t * (sorted[hi] - sorted[lo]);
}

std::vector<double> sorted_copy(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    return s;
}

}  // namespace levylab
