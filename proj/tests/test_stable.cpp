#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "levylab/analysis.hpp"
#include "levylab/descriptive.hpp"
#include "levylab/stable.hpp"

using namespace levylab;

namespace {

std::complex<double> empirical_cf(const std::vector<double>& x, double t) {
    std::complex<double> s = 0.0;
    for (double v : x) s += std::polar(1.0, t * v);
    return s / static_cast<double>(x.size());
}

// Dense trapezoid of (1/pi) int_0^T Re[phi(t) e^{-itx}] dt with the 1-parametrization written out by hand.
double inversion_oracle(double alpha, double theta, double x) {
    const std::size_t n = 1u << 20;
    const double T = 40.0, dt = T / static_cast<double>(n);
    const double beta = theta * std::tan(std::numbers::pi * alpha / 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = dt * static_cast<double>(i);
        const double ta = std::pow(t, alpha);
        const double v = std::exp(-ta) * std::cos(ta * beta - t * x);
        s += (i == 0 || i == n) ? 0.5 * v : v;
    }
    return s * dt / std::numbers::pi;
}

}  // namespace

TEST_CASE("characteristic function examples") {
    CHECK(std::abs(char_fn({2.0, 1.0, 0.5, 0.0}, 1.0) - std::exp(-1.0)) < 1e-14);
    CHECK(std::abs(char_fn({1.3, 2.0, -0.4, 1.5}, 0.0) - 1.0) < 1e-15);
    CHECK(std::abs(char_fn({1.5, 1.0, 0.0, 0.0}, 2.0) - std::exp(-std::pow(2.0, 1.5))) < 1e-14);
    CHECK(std::abs(char_fn({1.5, 1.0, 0.0, 0.0}, 2.0).real() - 0.05910) < 1e-5);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(StableParams({2.5, 1.0, 0.0, 0.0}).validate(), Error);
    CHECK_THROWS_AS(StableParams({1.5, -1.0, 0.0, 0.0}).validate(), Error);
    CHECK_THROWS_AS(StableParams({1.5, 1.0, 1.5, 0.0}).validate(), Error);
    try {
        StableParams{1.0, 1.0, 0.5, 0.0}.validate();
        FAIL("alpha = 1 with skew accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::unsupported_parametrization);
    }
    CHECK_NOTHROW(StableParams({1.0, 1.0, 0.0, 0.0}).validate());
}

TEST_CASE("Gaussian case has variance two") {
    const auto x = sample({2.0, 1.0, 0.0, 0.0}, RngStream{11, 0}, 100000);
    const double v = variance(x);
    const double se = 2.0 * std::sqrt(2.0 / (x.size() - 1.0));
    CHECK(std::abs(v - 2.0) < 3.0 * se);
}

TEST_CASE("Cauchy quartiles") {
    const auto x = sorted_copy(sample({1.0, 1.0, 0.0, 0.0}, RngStream{12, 0}, 100000));
    CHECK(std::abs(quantile_sorted(x, 0.5)) < 0.03);
    CHECK(std::abs(quantile_sorted(x, 0.75) - quantile_sorted(x, 0.25) - 2.0) < 0.05);
}

TEST_CASE("empirical characteristic function matches the analytic one") {
    const StableParams p{1.5, 1.0, 0.8, 0.0};
    const auto x = sample(p, RngStream{13, 0}, 100000);
    for (double t : {0.5, 1.0, 2.0}) CHECK(std::abs(empirical_cf(x, t) - char_fn(p, t)) < 0.02);
    const double bound = 3.0 / std::sqrt(static_cast<double>(x.size()));
    for (int i = 1; i <= 10; ++i) {
        const double t = 0.3 * i;
        CHECK(std::abs(empirical_cf(x, t) - char_fn(p, t)) < bound);
    }
}

TEST_CASE("stability under summation") {
    for (double alpha : {1.3, 1.7}) {
        const double theta = 0.6;
        const std::size_t n = 100000;
        const auto a = sample({alpha, 1.0, theta, 0.0}, RngStream{14, 0}, n);
        const auto b = sample({alpha, 1.0, theta, 0.0}, RngStream{14, 1}, n);
        const auto ref = sample({alpha, 1.0, theta, 0.0}, RngStream{14, 2}, n);
        std::vector<double> s(n);
        const double scale = std::pow(2.0, -1.0 / alpha);
        for (std::size_t i = 0; i < n; ++i) s[i] = (a[i] + b[i]) * scale;
        CHECK(ks_two_sample(s, ref) < ks_two_sample_critical_value(n, n, 0.01));
    }
}

TEST_CASE("sampling is deterministic per stream") {
    const StableParams p{1.4, 2.0, -0.3, 0.5};
    const auto a = sample(p, RngStream{7, 3}, 1000);
    const auto b = sample(p, RngStream{7, 3}, 1000);
    const auto c = sample(p, RngStream{7, 4}, 1000);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("Levy increments") {
    std::vector<double> g(100000);
    Rng rng(RngStream{15, 0});
    for (double& v : g) v = levy_increment(2.0, 0.0, 1.0, rng);
    CHECK(std::abs(variance(g) - 2.0) < 3.0 * 2.0 * std::sqrt(2.0 / (g.size() - 1.0)));

    const RngStream s{16, 0};
    Rng r1(s);
    const double z = sample_standard(1.5, 0.0, r1);
    CHECK(levy_increment(1.5, 0.0, 0.001, s) == doctest::Approx(0.01 * z).epsilon(1e-14));

    const auto direct = sample({1.5, 1.0, 0.9, 0.0}, RngStream{17, 0}, 1);
    CHECK(levy_increment(1.5, 0.9, 1.0, RngStream{17, 0}) == direct[0]);
    CHECK_THROWS_AS(levy_increment(1.0, 0.0, 1.0, s), Error);
    CHECK_THROWS_AS(levy_increment(1.5, 0.0, 0.0, s), Error);
}

TEST_CASE("closed-form densities") {
    CHECK(std::abs(pdf({1.0, 1.0, 0.0, 0.0}, 0.0) - 1.0 / std::numbers::pi) < 1e-6);
    CHECK(std::abs(pdf({2.0, 1.0, 0.0, 0.0}, 0.0) - 0.5 / std::sqrt(std::numbers::pi)) < 1e-6);
    CHECK(std::abs(pdf({1.5, 1.0, 0.5, 0.0}, 1.0) - inversion_oracle(1.5, 0.5, 1.0)) < 1e-5);
}

TEST_CASE("density is symmetric, nonnegative and normalized") {
    const StableParams sym{1.5, 1.0, 0.0, 0.0};
    for (double x : {0.1, 0.7, 2.3, 9.0, 40.0}) CHECK(std::abs(pdf(sym, x) - pdf(sym, -x)) < 1e-8);

    for (const StableParams& p : {StableParams{1.8, 1.0, 0.5, 0.0}, StableParams{1.5, 1.0, -0.7, 0.0}}) {
        const double L = 200.0, dx = 0.01;
        double mass = 0.0, lowest = 1.0;
        for (double x = -L; x <= L + 1e-9; x += dx) {
            const double v = pdf(p, x);
            lowest = std::min(lowest, v);
            mass += v * dx;
        }
        // Power-law tails P(|X| > L) ~ C_alpha sigma^alpha L^{-alpha}.
        mass += tail_constant(p.alpha) * std::pow(L, -p.alpha);
        CHECK(lowest >= 0.0);
        CHECK(std::abs(mass - 1.0) < 1e-4);
    }
}

TEST_CASE("maximum likelihood recovery") {
    int good = 0, positive = 0;
    for (int r = 0; r < 20; ++r) {
        const auto x = sample({1.5, 1.0, 0.5, 0.0}, RngStream{100, static_cast<std::uint64_t>(r)}, 10000);
        const StableFit f = mle_fit(x);
        CHECK(f.loglik >= f.initial_loglik);
        good += (f.params.alpha >= 1.4 && f.params.alpha <= 1.6 && f.params.theta >= 0.3 && f.params.theta <= 0.7);
        positive += f.params.theta > 0.0;
    }
    CHECK(good >= 18);
    CHECK(positive >= 18);

    const auto g = sample({2.0, 1.0, 0.0, 0.0}, RngStream{101, 0}, 10000);
    CHECK(mle_fit(g).params.alpha >= 1.9);
    const auto c = sample({1.0, 1.0, 0.0, 0.0}, RngStream{102, 0}, 10000);
    const double ac = mle_fit(c).params.alpha;
    CHECK(ac >= 0.9);
    CHECK(ac <= 1.1);

    CHECK_THROWS_AS(mle_fit(std::vector<double>(50, 1.0)), Error);
}

TEST_CASE("FFT density table agrees with quadrature") {
    const StandardStableTable t(1.5, 0.5);
    for (double z : {-3.0, -0.5, 0.0, 1.0, 4.0}) CHECK(t.density(z) == doctest::Approx(pdf({1.5, 1.0, 0.5, 0.0}, z)).epsilon(1e-3));
    CHECK(t.cdf(t.quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-4));
}
