#include "levylab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levylab/error.hpp"

namespace levylab {

double Polynomial::operator()(double x) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    for (std::size_t k = 1; k < coeffs.size(); ++k) d.coeffs.push_back(coeffs[k] * static_cast<double>(k));
    if (d.coeffs.empty()) d.coeffs.push_back(0.0);
    return d;
}

Polynomial Polynomial::antiderivative() const {
    Polynomial a;
    a.coeffs.push_back(0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) a.coeffs.push_back(coeffs[k] / static_cast<double>(k + 1));
    return a;
}

Polynomial Polynomial::from_roots(const std::vector<double>& roots, double leading) {
    Polynomial p{{leading}};
    for (double r : roots) {
        std::vector<double> next(p.coeffs.size() + 1, 0.0);
        for (std::size_t k = 0; k < p.coeffs.size(); ++k) {
            next[k + 1] += p.coeffs[k];
            next[k] -= r * p.coeffs[k];
        }
        p.coeffs = std::move(next);
    }
    return p;
}

Potential::Potential(std::string name, const std::vector<double>& critical_points, double scale)
    : name_(std::move(name)), scale_(scale) {
    require(!critical_points.empty() && critical_points.size() % 2 == 1, Errc::parameter_domain,
            "a well potential needs an odd number of critical points");
    require(scale > 0.0 && std::isfinite(scale), Errc::parameter_domain, "gradient scale must be positive");
    for (std::size_t i = 1; i < critical_points.size(); ++i) {
        if (!(critical_points[i] > critical_points[i - 1])) {
            std::ostringstream os;
            os << "critical points must be strictly increasing (position " << i << ")";
            fail(Errc::parameter_domain, os.str());
        }
    }
    gradient_ = Polynomial::from_roots(critical_points, scale);
    value_ = gradient_.antiderivative();
    curvature_ = gradient_.derivative();
    for (std::size_t i = 0; i < critical_points.size(); ++i)
        critical_.push_back({critical_points[i], i % 2 == 0 ? CriticalKind::minimum : CriticalKind::maximum});
    double r = 0.0;
    for (double c : critical_points) r = std::max(r, std::abs(c));
    growth_radius_ = r + 1.0;
}

std::vector<double> Potential::minima() const {
    std::vector<double> out;
    for (const auto& c : critical_)
        if (c.kind == CriticalKind::minimum) out.push_back(c.location);
    return out;
}

std::vector<double> Potential::saddles() const {
    std::vector<double> out;
    for (const auto& c : critical_)
        if (c.kind == CriticalKind::maximum) out.push_back(c.location);
    return out;
}

Potential quartic() { return Potential("quartic", {-1.0, 0.0, 1.0}, 1.0); }

Potential asymmetric_double_well(double m1, double s1, double m2, double c) {
    if (!(m1 < s1 && s1 < m2)) {
        std::ostringstream os;
        os << "double well needs m1 < s1 < m2 (got " << m1 << ", " << s1 << ", " << m2 << ")";
        fail(Errc::parameter_domain, os.str());
    }
    return Potential("double_well", {m1, s1, m2}, c);
}

Potential polynomial_wells(const std::vector<double>& critical_points, double c) {
    return Potential("polynomial", critical_points, c);
}

void UniformGrid::validate() const {
    require(n >= 2 && hi > lo && std::isfinite(lo) && std::isfinite(hi), Errc::argument,
            "grid needs at least two points and hi > lo");
}

double trapezoid(const std::vector<double>& values, double step) {
    if (values.size() < 2) return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
    return s * step;
}

double gibbs_log_weight(const GibbsSpec& spec, double w) {
    double fmin = spec.potential.value(spec.potential.minima().front());
    for (double m : spec.potential.minima()) fmin = std::min(fmin, spec.potential.value(m));
    return -std::pow(spec.epsilon, -spec.alpha) * (spec.potential.value(w) - fmin);
}

namespace {

void validate_spec(const GibbsSpec& spec) {
    require(spec.epsilon > 0.0 && std::isfinite(spec.epsilon), Errc::parameter_domain, "epsilon must be positive");
    require(spec.alpha > 1.0 && spec.alpha <= 2.0, Errc::parameter_domain, "alpha must lie in (1, 2]");
}

// Unchecked normalized density and the mass in the outer 1% of cells per side.
GridDensity density_on(const GibbsSpec& spec, const UniformGrid& grid, double& boundary_mass) {
    GridDensity d{grid, std::vector<double>(grid.n)};
    const double inv = std::pow(spec.epsilon, -spec.alpha);
    double fmin = spec.potential.value(grid.at(0));
    for (std::size_t i = 0; i < grid.n; ++i) fmin = std::min(fmin, spec.potential.value(grid.at(i)));
    for (std::size_t i = 0; i < grid.n; ++i) d.values[i] = std::exp(-inv * (spec.potential.value(grid.at(i)) - fmin));
    const double z = trapezoid(d.values, grid.step());
    for (auto& v : d.values) v /= z;
    const std::size_t k = std::max<std::size_t>(1, grid.n / 100);
    std::vector<double> left(d.values.begin(), d.values.begin() + static_cast<std::ptrdiff_t>(k + 1));
    std::vector<double> right(d.values.end() - static_cast<std::ptrdiff_t>(k + 1), d.values.end());
    boundary_mass = trapezoid(left, grid.step()) + trapezoid(right, grid.step());
    return d;
}

}  // namespace

GridDensity gibbs_density(const GibbsSpec& spec, const UniformGrid& grid) {
    validate_spec(spec);
    grid.validate();
    const auto minima = spec.potential.minima();
    if (grid.n < 512 || grid.lo > minima.front() - 3.0 || grid.hi < minima.back() + 3.0) {
        std::ostringstream os;
        os << "Gibbs grid must cover [" << minima.front() - 3.0 << ", " << minima.back() + 3.0
           << "] with at least 512 points";
        fail(Errc::argument, os.str());
    }
    double boundary = 0.0;
    GridDensity d = density_on(spec, grid, boundary);
    if (boundary > 1e-3) {
        std::ostringstream os;
        os << "Gibbs density carries mass " << boundary << " at the grid boundary [" << grid.lo << ", " << grid.hi
           << "]";
        fail(Errc::grid_too_small, os.str());
    }
    return d;
}

UniformGrid default_gibbs_grid(const GibbsSpec& spec) {
    validate_spec(spec);
    const auto minima = spec.potential.minima();
    UniformGrid g;
    g.lo = std::min(-6.0, minima.front() - 3.0);
    g.hi = std::max(6.0, minima.back() + 3.0);
    const double spacing = 12.0 / 4095.0;
    g.n = static_cast<std::size_t>(std::ceil((g.hi - g.lo) / spacing)) + 1;
    for (int iter = 0; iter < 40; ++iter) {
        double boundary = 0.0;
        density_on(spec, g, boundary);
        if (boundary < 1e-3) return g;
        const double mid = 0.5 * (g.lo + g.hi), half = 0.75 * (g.hi - g.lo);
        g.lo = mid - half;
        g.hi = mid + half;
        g.n = static_cast<std::size_t>(std::ceil((g.hi - g.lo) / spacing)) + 1;
    }
    fail(Errc::grid_too_small, "could not find a Gibbs grid with boundary mass below 1e-3");
}

double gibbs_expectation(const GibbsSpec& spec, const std::function<double(double)>& g, const UniformGrid& grid) {
    const GridDensity d = gibbs_density(spec, grid);
    std::vector<double> prod(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) prod[i] = g(grid.at(i)) * d.values[i];
    const double v = trapezoid(prod, grid.step());
    require(std::isfinite(v), Errc::numerical, "Gibbs expectation is not finite");
    return v;
}

double gibbs_expectation(const GibbsSpec& spec, const std::function<double(double)>& g) {
    return gibbs_expectation(spec, g, default_gibbs_grid(spec));
}

}  // namespace levylab
