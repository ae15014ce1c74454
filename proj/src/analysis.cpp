#include "levylab/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levylab/descriptive.hpp"
#include "levylab/error.hpp"

namespace levylab {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014327;

}  // namespace

double silverman_bandwidth(std::span<const double> samples) {
    require(samples.size() >= 2, Errc::insufficient_data, "bandwidth rule needs at least two samples");
    const double sd = std::sqrt(variance(samples));
    const auto s = sorted_copy(samples);
    const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
    double scale = sd;
    if (iqr > 0.0) scale = std::min(sd, iqr / 1.34);
    require(scale > 0.0 && std::isfinite(scale), Errc::degenerate_data, "samples have zero spread");
    return 0.9 * scale * std::pow(static_cast<double>(samples.size()), -0.2);
}

LinearBinner::LinearBinner(double lo, double hi, double bin_width) : lo_(lo), dx_(bin_width) {
    require(hi > lo && bin_width > 0.0, Errc::argument, "binner needs hi > lo and a positive bin width");
    counts_.assign(static_cast<std::size_t>(std::ceil((hi - lo) / bin_width)) + 1, 0.0);
}

void LinearBinner::add(double x, double weight) noexcept {
    ++n_;
    total_ += weight;
    const double u = (x - lo_) / dx_;
    if (!(u >= 0.0) || u >= static_cast<double>(counts_.size() - 1)) {
        outside_ += weight;
        return;
    }
    const auto j = static_cast<std::size_t>(u);
    const double t = u - static_cast<double>(j);
    counts_[j] += weight * (1.0 - t);
    counts_[j + 1] += weight * t;
}

void LinearBinner::merge(const LinearBinner& other) {
    require(other.lo_ == lo_ && other.dx_ == dx_ && other.counts_.size() == counts_.size(), Errc::argument,
            "binners have different layouts");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    outside_ += other.outside_;
    n_ += other.n_;
}

namespace {

void normalize(DensityEstimate& d) {
    d.captured_mass = trapezoid(d.values, d.grid.step());
    require(d.captured_mass > 0.0, Errc::degenerate_data, "no kernel mass falls on the grid");
    for (auto& v : d.values) v /= d.captured_mass;
}

}  // namespace

DensityEstimate kde_binned(const LinearBinner& bins, const UniformGrid& grid, double bandwidth) {
    grid.validate();
    require(bandwidth > 0.0 && std::isfinite(bandwidth), Errc::argument, "bandwidth must be positive");
    require(bins.total() > 0.0, Errc::insufficient_data, "no samples were binned");
    DensityEstimate d{grid, std::vector<double>(grid.n, 0.0), bandwidth, bins.count(), 0.0};
    const double reach = 8.0 * bandwidth;
    const double norm = inv_sqrt_2pi / (bandwidth * bins.total());
    const auto& c = bins.counts();
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.at(i);
        const double ulo = (x - reach - bins.lo()) / bins.bin_width();
        const double uhi = (x + reach - bins.lo()) / bins.bin_width();
        const auto jlo = static_cast<std::size_t>(std::max(0.0, std::ceil(ulo)));
        const auto jhi = static_cast<std::size_t>(std::clamp(std::floor(uhi), -1.0, static_cast<double>(c.size()) - 1.0) + 1.0);
        double s = 0.0;
        for (std::size_t j = jlo; j < jhi; ++j) {
            if (c[j] == 0.0) continue;
            const double z = (x - (bins.lo() + static_cast<double>(j) * bins.bin_width())) / bandwidth;
            s += c[j] * std::exp(-0.5 * z * z);
        }
        d.values[i] = s * norm;
    }
    normalize(d);
    return d;
}

DensityEstimate kde(std::span<const double> samples, const UniformGrid& grid, std::optional<double> bandwidth) {
    require(samples.size() >= 100, Errc::insufficient_data, "kernel density estimate needs at least 100 samples");
    grid.validate();
    const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    require(h > 0.0 && std::isfinite(h), Errc::argument, "bandwidth must be positive");
    if (samples.size() > 20000) {
        const double dx = std::min(grid.step(), h / 16.0);
        // Anchor bins to the grid so translations of grid and samples commute.
        const double lo = grid.lo - std::ceil(8.0 * h / dx + 1.0) * dx;
        LinearBinner bins(lo, grid.hi + 8.0 * h + 2.0 * dx, dx);
        for (double x : samples) bins.add(x);
        return kde_binned(bins, grid, h);
    }
    DensityEstimate d{grid, std::vector<double>(grid.n, 0.0), h, samples.size(), 0.0};
    const auto s = sorted_copy(samples);
    const double reach = 8.0 * h;
    const double norm = inv_sqrt_2pi / (h * static_cast<double>(s.size()));
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.at(i);
        auto lo = std::lower_bound(s.begin(), s.end(), x - reach);
        auto hi = std::upper_bound(lo, s.end(), x + reach);
        double acc = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double z = (x - *it) / h;
            acc += std::exp(-0.5 * z * z);
        }
        d.values[i] = acc * norm;
    }
    normalize(d);
    return d;
}

std::vector<double> find_modes(const std::vector<double>& v, const UniformGrid& grid, double min_prominence) {
    require(v.size() == grid.n && grid.n >= 3, Errc::argument, "density values must match the grid");
    const double peak = *std::max_element(v.begin(), v.end());
    std::vector<double> modes;
    if (!(peak > 0.0)) return modes;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(v[i] > v[i - 1])) continue;
        // Plateau tops count once, at their centre.
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        if (j + 1 >= n || !(v[j + 1] < v[i])) {
            i = j;
            continue;
        }
        const std::size_t c = (i + j) / 2;
        double left_min = v[i];
        std::size_t l = i;
        while (l > 0 && v[l - 1] <= v[i]) left_min = std::min(left_min, v[--l]);
        double right_min = v[j];
        std::size_t r = j;
        while (r + 1 < n && v[r + 1] <= v[i]) right_min = std::min(right_min, v[++r]);
        // A side that reaches the boundary without meeting a higher value
        // is bounded by its own minimum.
        const double prominence = v[i] - std::max(left_min, right_min);
        if (prominence >= min_prominence * peak) {
            double x = grid.at(c);
            if (c >= 2 && c + 2 < n) {
                // Least-squares parabola through five points at offsets -2..2.
                double s1 = 0.0, s2 = 0.0, s0 = 0.0;
                for (int k = -2; k <= 2; ++k) {
                    const double y = v[c + static_cast<std::size_t>(k + 2) - 2];
                    s0 += y;
                    s1 += k * y;
                    s2 += k * k * y;
                }
                const double b = s1 / 10.0;
                const double a = (s2 - 2.0 * s0) / 14.0;
                if (a < 0.0) {
                    const double off = std::clamp(-b / (2.0 * a), -1.0, 1.0);
                    x += off * grid.step();
                }
            }
            modes.push_back(x);
        }
        i = j;
    }
    return modes;
}

std::vector<double> find_modes(const DensityEstimate& density, double min_prominence) {
    return find_modes(density.values, density.grid, min_prominence);
}

ModeShiftReport mode_shift(const std::vector<double>& empirical, const std::vector<double>& reference,
                           double match_radius) {
    require(!reference.empty(), Errc::argument, "mode shift needs at least one reference mode");
    ModeShiftReport rep;
    for (double r : reference) {
        ModeMatch m{r, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(), false};
        for (double e : empirical) {
            const double d = std::abs(e - r);
            if (d < m.distance) {
                m.distance = d;
                m.nearest = e;
            }
        }
        m.matched = m.distance <= match_radius;
        if (!m.matched) ++rep.unmatched;
        rep.matches.push_back(m);
    }
    return rep;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
    require(samples.size() >= 20, Errc::insufficient_data, "KS statistic needs at least 20 samples");
    const auto s = sorted_copy(samples);
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = cdf(s[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double ks_two_sample(std::span<const double> x, std::span<const double> y) {
    require(x.size() >= 20 && y.size() >= 20, Errc::insufficient_data, "KS statistic needs at least 20 samples");
    const auto a = sorted_copy(x), b = sorted_copy(y);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-17) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

namespace {

double effective_root(double n) { return std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n); }

double kolmogorov_quantile(double level) {
    double lo = 0.2, hi = 5.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_survival(mid) > level) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double ks_pvalue(double statistic, std::size_t n) {
    return kolmogorov_survival(effective_root(static_cast<double>(n)) * statistic);
}

double ks_critical_value(std::size_t n, double level) {
    require(level > 0.0 && level < 1.0, Errc::argument, "test level must lie in (0, 1)");
    return kolmogorov_quantile(level) / effective_root(static_cast<double>(n));
}

double ks_two_sample_critical_value(std::size_t n, std::size_t m, double level) {
    require(level > 0.0 && level < 1.0, Errc::argument, "test level must lie in (0, 1)");
    const double en = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    return kolmogorov_quantile(level) / effective_root(en);
}

double binomial_test(std::size_t k, std::size_t n, double p) {
    require(n >= 1 && k <= n, Errc::argument, "binomial test needs 0 <= k <= n and n >= 1");
    require(p > 0.0 && p < 1.0, Errc::argument, "success probability must lie in (0, 1)");
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    const double lower = boost::math::cdf(dist, static_cast<double>(k));
    const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

}  // namespace levylab
