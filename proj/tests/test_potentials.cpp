#include <doctest.h>

#include <cmath>
#include <random>

#include "levylab/analysis.hpp"
#include "levylab/error.hpp"
#include "levylab/potentials.hpp"

using namespace levylab;

namespace {

// Composite Simpson on [-a, a] with n intervals.
double simpson(const std::function<double(double)>& f, double a, int n) {
    const double h = 2.0 * a / n;
    double s = f(-a) + f(a);
    for (int i = 1; i < n; ++i) s += f(-a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_CASE("quartic examples") {
    const Potential f = quartic();
    CHECK(f.value(1.0) == -0.25);
    CHECK(f.gradient(2.0) == 6.0);
    const auto m = f.minima();
    REQUIRE(m.size() == 2);
    CHECK(m[0] == doctest::Approx(-1.0));
    CHECK(m[1] == doctest::Approx(1.0));
    REQUIRE(f.saddles().size() == 1);
    CHECK(f.saddles()[0] == doctest::Approx(0.0));
}

TEST_CASE("gradients match central differences and critical points are exact") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (const Potential& f : {quartic(), asymmetric_double_well(-1.0, 0.0, 2.0), polynomial_wells({-2, -1, 0, 1, 2})}) {
        for (int i = 0; i < 100; ++i) {
            const double w = u(gen), d = 1e-5;
            const double fd = (f.value(w + d) - f.value(w - d)) / (2.0 * d);
            CHECK(std::abs(fd - f.gradient(w)) <= 1e-6 * std::max(1.0, std::abs(f.gradient(w))));
        }
        double last = -HUGE_VAL;
        bool want_min = true;
        for (const auto& c : f.critical_points()) {
            CHECK(std::abs(f.gradient(c.location)) < 1e-10);
            CHECK((c.kind == CriticalKind::minimum) == want_min);
            CHECK((want_min ? f.curvature(c.location) > 0.0 : f.curvature(c.location) < 0.0));
            CHECK(c.location > last);
            last = c.location;
            want_min = !want_min;
        }
    }
}

TEST_CASE("asymmetric double well") {
    const Potential f = asymmetric_double_well(-1.0, 0.0, 2.0, 1.5);
    CHECK(f.gradient(1.0) == doctest::Approx(1.5 * 2.0 * 1.0 * -1.0));
    // Curvature sign from differences of the value confirms minima at -1 and 2.
    for (double m : {-1.0, 2.0}) {
        const double d = 1e-3;
        CHECK(f.value(m + d) + f.value(m - d) - 2.0 * f.value(m) > 0.0);
    }
    const Potential s = asymmetric_double_well(-1.0, 0.0, 1.0);
    const Potential q = quartic();
    for (double w : {-1.7, -0.3, 0.4, 2.2}) CHECK(s.gradient(w) / q.gradient(w) == doctest::Approx(1.0));
    CHECK_THROWS_AS(asymmetric_double_well(1.0, 0.0, 2.0), Error);
    CHECK_THROWS_AS(polynomial_wells({-1.0, 0.0}), Error);
}

TEST_CASE("Gibbs density") {
    const GibbsSpec spec{quartic(), 1.0, 1.5};
    const UniformGrid grid{-6.0, 6.0, 1201};
    const GridDensity d = gibbs_density(spec, grid);
    CHECK(trapezoid(d.values, grid.step()) == doctest::Approx(1.0).epsilon(1e-6));
    const std::size_t mid = 600, one = 700;
    CHECK(grid.at(one) == doctest::Approx(1.0));
    CHECK(d.values[one] / d.values[mid] == doctest::Approx(std::exp(0.25)).epsilon(1e-12));
    CHECK(std::exp(0.25) == doctest::Approx(1.2840).epsilon(1e-4));
    for (std::size_t i = 0; i < grid.n; ++i) CHECK(d.values[i] == doctest::Approx(d.values[grid.n - 1 - i]).epsilon(1e-12));

    const GibbsSpec cold{quartic(), 0.5, 1.5};
    const GridDensity c = gibbs_density(cold, grid);
    CHECK(c.values[one] / c.values[mid] == doctest::Approx(2.0281).epsilon(1e-4));

    const auto modes = find_modes(d.values, grid, 0.01);
    REQUIRE(modes.size() == 2);
    CHECK(std::abs(modes[0] + 1.0) <= grid.step());
    CHECK(std::abs(modes[1] - 1.0) <= grid.step());

    CHECK_THROWS_AS(gibbs_density(GibbsSpec{quartic(), 3.0, 1.5}, UniformGrid{-1.5, 1.5, 1024}), Error);
}

TEST_CASE("Gibbs expectations") {
    const GibbsSpec spec{quartic(), 1.0, 1.5};
    CHECK(std::abs(gibbs_expectation(spec, [](double w) { return w; })) < 1e-12);
    CHECK(gibbs_expectation(spec, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));

    auto weight = [](double w) { return std::exp(-(w * w * w * w / 4.0 - w * w / 2.0)); };
    auto ratio = [&](int n) {
        return simpson([&](double w) { return w * w * weight(w); }, 8.0, n) / simpson(weight, 8.0, n);
    };
    const double coarse = ratio(4000), fine = ratio(8000);
    const double oracle = fine + (fine - coarse) / 15.0;
    CHECK(std::abs(coarse - fine) < 1e-8);
    const double w2 = gibbs_expectation(spec, [](double w) { return w * w; });
    CHECK(w2 > 0.0);
    CHECK(w2 == doctest::Approx(oracle).epsilon(1e-8));

    auto g1 = [](double w) { return std::cos(w); };
    auto g2 = [](double w) { return w * w * w * w; };
    const double lin = gibbs_expectation(spec, [&](double w) { return 2.0 * g1(w) - 3.0 * g2(w); });
    CHECK(lin == doctest::Approx(2.0 * gibbs_expectation(spec, g1) - 3.0 * gibbs_expectation(spec, g2)).epsilon(1e-12));
    CHECK(gibbs_expectation(spec, [](double w) { return w > 0.5 ? 1.0 : 0.0; }) >= 0.0);
}
