#ifndef LEVYLAB_DESCRIPTIVE_HPP
#define LEVYLAB_DESCRIPTIVE_HPP

#include <span>
#include <vector>

namespace levylab {

double mean(std::span<const double> x);
// Unbiased sample variance.
double variance(std::span<const double> x);
// Linear-interpolation quantile of an already sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);
std::vector<double> sorted_copy(std::span<const double> x);

}  // namespace levylab

#endif
