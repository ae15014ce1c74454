#ifndef LEVYLAB_ANALYSIS_HPP
#define LEVYLAB_ANALYSIS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "levylab/potentials.hpp"

namespace levylab {

struct DensityEstimate {
    UniformGrid grid;
    std::vector<double> values;
    double bandwidth = 0.0;
    std::size_t sample_count = 0;
    // Trapezoidal mass on the grid before renormalization.
    double captured_mass = 0.0;
};

// 0.9 min(sd, IQR / 1.34) n^{-1/5}.
double silverman_bandwidth(std::span<const double> samples);

// Linear binning accumulator for streamed samples.
class LinearBinner {
public:
    LinearBinner(double lo, double hi, double bin_width);

    void add(double x, double weight = 1.0) noexcept;
    void merge(const LinearBinner& other);

    double lo() const noexcept { return lo_; }
    double bin_width() const noexcept { return dx_; }
    std::size_t bins() const noexcept { return counts_.size(); }
    const std::vector<double>& counts() const noexcept { return counts_; }
    double total() const noexcept { return total_; }
    double outside() const noexcept { return outside_; }
    std::size_t count() const noexcept { return n_; }

private:
    double lo_, dx_;
    std::vector<double> counts_;
    double total_ = 0.0, outside_ = 0.0;
    std::size_t n_ = 0;
};

// Gaussian-kernel estimate; bandwidth defaults to the Silverman rule.
DensityEstimate kde(std::span<const double> samples, const UniformGrid& grid,
                    std::optional<double> bandwidth = std::nullopt);
// Kernel estimate from binned counts; bins must extend 8 bandwidths past the grid.
DensityEstimate kde_binned(const LinearBinner& bins, const UniformGrid& grid, double bandwidth);

// Interior local maxima with prominence >= min_prominence * peak, refined by a
// five-point quadratic fit.
std::vector<double> find_modes(const std::vector<double>& values, const UniformGrid& grid,
                               double min_prominence = 0.01);
std::vector<double> find_modes(const DensityEstimate& density, double min_prominence = 0.01);

struct ModeMatch {
    double reference;
    double nearest;   // NaN when no empirical modes exist
    double distance;  // infinity when no empirical modes exist
    bool matched;
};

struct ModeShiftReport {
    std::vector<ModeMatch> matches;
    std::size_t unmatched = 0;
};

ModeShiftReport mode_shift(const std::vector<double>& empirical, const std::vector<double>& reference,
                           double match_radius = 0.5);

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> x, std::span<const double> y);
// Asymptotic Kolmogorov tail probability P(sqrt(n) D > lambda).
double kolmogorov_survival(double lambda);
double ks_pvalue(double statistic, std::size_t n);
double ks_critical_value(std::size_t n, double level = 0.01);
double ks_two_sample_critical_value(std::size_t n, std::size_t m, double level = 0.01);

// Two-sided exact binomial test p-value for k successes in n trials.
double binomial_test(std::size_t k, std::size_t n, double p);

}  // namespace levylab

#endif
