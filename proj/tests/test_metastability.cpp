#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "levylab/analysis.hpp"
#include "levylab/metastability.hpp"
#include "levylab/potentials.hpp"
#include "levylab/rng.hpp"
#include "levylab/stable.hpp"

using namespace levylab;

TEST_CASE("analytic exit rates") {
    const WellSpec sym{-1.0, 0.0, 1.0, 0.0001};
    const double c = -0.5 / (std::sqrt(std::numbers::pi) * std::cos(0.75 * std::numbers::pi));
    CHECK(tail_constant(1.5) == doctest::Approx(c).epsilon(1e-14));
    CHECK(c == doctest::Approx(0.39894).epsilon(1e-5));
    CHECK(exit_rate_analytic(sym, 1.0, 1.5, 0.0) == doctest::Approx(c).epsilon(1e-14));
    const ExitRates r = exit_rates(sym, 1.0, 1.5, 0.0);
    CHECK(r.left == r.right);
    CHECK(exit_rate_analytic(sym, 0.5, 1.5, 0.3) / exit_rate_analytic(sym, 1.0, 1.5, 0.3) ==
          doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
    const ExitRates skew = exit_rates(sym, 1.0, 1.5, 0.9);
    CHECK(skew.right / skew.left == doctest::Approx(19.0));
    CHECK_THROWS_AS(exit_rate_analytic(sym, 1.0, 2.5, 0.0), Error);
}

TEST_CASE("wells of a potential") {
    const WellSpec left = well_of(quartic(), 0, 0.1);
    CHECK(std::isinf(left.s_prev));
    CHECK(left.m == doctest::Approx(-1.0));
    CHECK(left.s_next == doctest::Approx(0.0));
    CHECK(left.upper() == doctest::Approx(-0.1));
    CHECK_THROWS_AS(well_of(quartic(), 2), Error);
    CHECK_THROWS_AS((WellSpec{-1.0, -0.95, 1.0, 0.1}).validate(), Error);
}

TEST_CASE("exit simulation") {
    const Potential f = quartic();
    const WellSpec left = well_of(f, 0, 0.1);
    std::vector<std::size_t> steps;
    for (std::uint64_t s = 0; s < 100; ++s) steps.push_back(simulate_exit(f, left, 10.0, 1.5, 0.0, 0.01, 100000, RngStream{1, s}).steps);
    std::sort(steps.begin(), steps.end());
    CHECK(steps[49] <= 10);
    CHECK(steps[98] <= 100);

    const ExitRecord stuck = simulate_exit(f, left, 0.0, 1.5, 0.0, 0.005, 10000, RngStream{2, 0});
    CHECK(stuck.censored);
    CHECK(stuck.side == ExitSide::none);

    const Potential wells = polynomial_wells({-2, -1, 0, 1, 2});
    const WellSpec middle = well_of(wells, 1, 0.1);
    CHECK(middle.m == doctest::Approx(0.0));
    std::vector<ExitRecord> recs;
    for (std::uint64_t s = 0; s < 1000; ++s) recs.push_back(simulate_exit(wells, middle, 0.2, 1.5, 0.9, 0.005, 10000000, RngStream{3, s}));
    std::size_t right = 0, left_count = 0;
    for (const auto& r : recs) {
        CHECK(r.exit_time > 0.0);
        if (r.side == ExitSide::right) CHECK(r.final_position > middle.upper());
        if (r.side == ExitSide::left) CHECK(r.final_position < middle.lower());
        right += r.side == ExitSide::right;
        left_count += r.side == ExitSide::left;
    }
    CHECK(right > left_count);
    CHECK(binomial_test(right, right + left_count, 0.5) < 0.01);
}

TEST_CASE("exit law test") {
    Rng rng(RngStream{4, 0});
    std::vector<ExitRecord> recs(1000);
    for (auto& r : recs) {
        r.exit_time = rng.exponential();
        r.side = ExitSide::right;
    }
    const ExitLawResult ok = exit_law_test(recs, 1.0);
    CHECK(ok.pass);
    CHECK(ok.mean_scaled == doctest::Approx(1.0).epsilon(0.1));

    std::vector<ExitRecord> doubled(recs);
    for (auto& r : doubled) r.exit_time *= 2.0;
    CHECK(exit_law_test(doubled, 0.5).ks == doctest::Approx(ok.ks).epsilon(1e-12));

    recs.resize(300);
    CHECK_THROWS_AS(exit_law_test(recs, 1.0), Error);
}

TEST_CASE("transition matrix") {
    const TransitionMatrix q = transition_matrix({-1.0, 2.0}, {0.0}, 1.5, 0.0);
    CHECK(q(0, 1) == doctest::Approx(0.5));
    CHECK(q(1, 0) == doctest::Approx(0.5 * std::pow(2.0, -1.5)));
    CHECK(q(1, 0) == doctest::Approx(0.17678).epsilon(1e-4));

    const TransitionMatrix m = transition_matrix({-3.0, -1.0, 1.0, 3.0}, {-2.0, 0.0, 2.0}, 1.4, 0.3);
    for (std::size_t i = 0; i < m.n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < m.n; ++j) {
            if (i == j) continue;
            off += m(i, j);
            CHECK(m(i, j) >= 0.0);
        }
        CHECK(off + m(i, i) == 0.0);
        CHECK(m.rates[i] == -m(i, i));
    }
    const TransitionMatrix up = transition_matrix({-3.0, -1.0, 1.0, 3.0}, {-2.0, 0.0, 2.0}, 1.4, 1.0);
    for (std::size_t i = 0; i < up.n; ++i)
        for (std::size_t j = 0; j < i; ++j) CHECK(up(i, j) == 0.0);
    CHECK_THROWS_AS(transition_matrix({-1.0, 2.0}, {3.0}, 1.5, 0.0), Error);
}

TEST_CASE("double-well occupancy") {
    const Occupancy s = double_well_occupancy(-1.0, 1.0, 1.5, 0.0);
    CHECK(s.pi1 == doctest::Approx(0.5));
    CHECK(s.pi2 == doctest::Approx(0.5));
    const Occupancy o = double_well_occupancy(-1.0, 2.0, 1.5, 0.0);
    CHECK(o.pi2 / o.pi1 == doctest::Approx(std::pow(2.0, 1.5)));
    CHECK(o.pi2 == doctest::Approx(0.7388).epsilon(1e-4));
    CHECK(o.pi1 + o.pi2 == doctest::Approx(1.0));
    const double a = 1.5, m1 = 1.0, m2 = 2.0;
    const double theta = (std::pow(m1, a) - std::pow(m2, a)) / (std::pow(m1, a) + std::pow(m2, a));
    const Occupancy x = double_well_occupancy(-m1, m2, a, theta);
    CHECK(x.pi1 == doctest::Approx(0.5));
}
