#ifndef LEVYLAB_POTENTIALS_HPP
#define LEVYLAB_POTENTIALS_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace levylab {

// Dense polynomial with ascending coefficients.
struct Polynomial {
    std::vector<double> coeffs;

    double operator()(double x) const noexcept;
    Polynomial derivative() const;
    // Antiderivative vanishing at zero.
    Polynomial antiderivative() const;
    static Polynomial from_roots(const std::vector<double>& roots, double leading);
};

enum class CriticalKind { minimum, maximum };

struct CriticalPoint {
    double location;
    CriticalKind kind;
};

// One-dimensional polynomial objective with gradient c * prod (w - r_i).
class Potential {
public:
    Potential(std::string name, const std::vector<double>& critical_points, double scale);

    const std::string& name() const noexcept { return name_; }
    double value(double w) const noexcept { return value_(w); }
    double gradient(double w) const noexcept { return gradient_(w); }
    double curvature(double w) const noexcept { return curvature_(w); }

    const std::vector<CriticalPoint>& critical_points() const noexcept { return critical_; }
    std::vector<double> minima() const;
    std::vector<double> saddles() const;
    double scale() const noexcept { return scale_; }
    // Beyond this radius |f'| grows at least like |w|^2.
    double growth_radius() const noexcept { return growth_radius_; }

private:
    std::string name_;
    double scale_;
    Polynomial gradient_, value_, curvature_;
    std::vector<CriticalPoint> critical_;
    double growth_radius_;
};

// f(w) = w^4/4 - w^2/2.
Potential quartic();
// Gradient c (w - m1)(w - s1)(w - m2).
Potential asymmetric_double_well(double m1, double s1, double m2, double c = 1.0);
// Gradient c prod (w - r_i) over an odd, strictly increasing list of
// alternating minima and maxima that starts and ends with a minimum.
Potential polynomial_wells(const std::vector<double>& critical_points, double c = 1.0);

struct UniformGrid {
    double lo = -6.0;
    double hi = 6.0;
    std::size_t n = 4096;

    double step() const noexcept { return (hi - lo) / static_cast<double>(n - 1); }
    double at(std::size_t i) const noexcept { return lo + step() * static_cast<double>(i); }
    void validate() const;
};

struct GibbsSpec {
    Potential potential;
    double epsilon;
    double alpha;
};

struct GridDensity {
    UniformGrid grid;
    std::vector<double> values;
};

// Unnormalized log-density -eps^{-alpha} (f(w) - min f).
double gibbs_log_weight(const GibbsSpec& spec, double w);

GridDensity gibbs_density(const GibbsSpec& spec, const UniformGrid& grid);
// [-6, 6] with 4096 points, widened around the minima until the boundary mass
// falls below 1e-3.
UniformGrid default_gibbs_grid(const GibbsSpec& spec);
double gibbs_expectation(const GibbsSpec& spec, const std::function<double(double)>& g, const UniformGrid& grid);
double gibbs_expectation(const GibbsSpec& spec, const std::function<double(double)>& g);

// Trapezoidal integral of tabulated values.
double trapezoid(const std::vector<double>& values, double step);

}  // namespace levylab

#endif
