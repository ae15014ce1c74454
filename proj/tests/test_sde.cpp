#include <doctest.h>

#include <cmath>

#include "levylab/analysis.hpp"
#include "levylab/potentials.hpp"
#include "levylab/sde.hpp"

using namespace levylab;

TEST_CASE("step schedules") {
    const StepSchedule c = StepSchedule::constant(0.01);
    CHECK(c.eta(1) == 0.01);
    CHECK(c.eta(1000) == 0.01);
    const StepSchedule p = StepSchedule::polynomial(0.1, 0.5);
    CHECK(p.eta(4) == doctest::Approx(0.05));
    double H = 0.0;
    for (std::size_t k = 1; k <= 10000; ++k) H += p.eta(k);
    CHECK(H > 10.0);
    CHECK_THROWS_AS(StepSchedule::constant(0.0).validate(), Error);
    CHECK_THROWS_AS(StepSchedule::polynomial(0.1, -1.0).validate(), Error);
}

TEST_CASE("noiseless runs are gradient descent") {
    const Potential f = quartic();
    const Trajectory t = euler_maruyama(f, 1.5, 0.0, 0.0, StepSchedule::constant(0.01), 10000, 2.0, RngStream{1, 0});
    REQUIRE(t.iterates.size() == 10001);
    CHECK(std::abs(t.iterates.back() - 1.0) < 1e-6);
    double w = 2.0;
    for (std::size_t k = 1; k <= 10000; ++k) {
        w = w + 0.01 * -f.gradient(w);
        CHECK(t.iterates[k] == w);
    }
}

TEST_CASE("heavy-tailed dynamics cross the saddle") {
    const Potential f = quartic();
    const Trajectory t = euler_maruyama(f, 1.9, 0.0, 1.0, StepSchedule::constant(0.001), 10000, 0.0, RngStream{2, 0});
    CHECK_FALSE(t.blowup);
    bool neg = false, pos = false;
    for (double w : t.iterates) {
        neg = neg || w < 0.0;
        pos = pos || w > 0.0;
    }
    CHECK(neg);
    CHECK(pos);
    const Trajectory u = euler_maruyama(f, 1.9, 0.0, 1.0, StepSchedule::constant(0.001), 10000, 0.0, RngStream{2, 0});
    CHECK(t.iterates == u.iterates);
}

TEST_CASE("K = 0 at h0 reproduces the unmodified recursion bit for bit") {
    const Potential f = quartic();
    for (double alpha : {1.3, 1.5, 1.7})
        for (double eps : {0.5, 1.0, 2.0}) {
            const RngStream s{3, static_cast<std::uint64_t>(alpha * 10 + eps)};
            const StepSchedule sch = StepSchedule::constant(0.001);
            const Trajectory a = euler_maruyama(f, alpha, 0.4, eps, sch, 5000, 0.0, s);
            const Trajectory b =
                simulate_afld(f, alpha, 0.4, eps, DriftApproxParams::gradient_reduction(alpha), sch, 5000, 0.0, s);
            CHECK(a.iterates == b.iterates);
            CHECK(b.drift == DriftKind::afld);
        }
}

TEST_CASE("noise scales linearly in epsilon") {
    const Potential f = quartic();
    IntegratorOptions o;
    o.record_increments = true;
    o.drift_cap = 0.05;
    const StepSchedule sch = StepSchedule::constant(0.001);
    const Trajectory a = euler_maruyama(f, 1.6, 0.2, 1.0, sch, 2000, 0.0, RngStream{4, 0}, o);
    const Trajectory b = euler_maruyama(f, 1.6, 0.2, 2.0, sch, 2000, 0.0, RngStream{4, 0}, o);
    REQUIRE(a.increments.size() == b.increments.size());
    for (std::size_t i = 0; i < a.increments.size(); ++i) CHECK(b.increments[i] == 2.0 * a.increments[i]);
}

TEST_CASE("blowups truncate the trajectory") {
    const Potential f = quartic();
    IntegratorOptions o;
    o.blowup_threshold = 50.0;
    const Trajectory t = euler_maruyama(f, 1.1, 0.0, 30.0, StepSchedule::constant(0.01), 100000, 0.0, RngStream{5, 0}, o);
    CHECK(t.blowup);
    CHECK(t.iterates.size() == t.blowup_step);
    for (double w : t.iterates) CHECK(std::isfinite(w));
    CHECK_FALSE(t.blowup_reason.empty());
}

TEST_CASE("drift substeps tame stiff starts") {
    const Potential f = quartic();
    const Trajectory plain = euler_maruyama(f, 1.5, 0.0, 0.0, StepSchedule::constant(0.01), 200, 50.0, RngStream{6, 0});
    CHECK(plain.blowup);
    IntegratorOptions o;
    o.drift_cap = 0.05;
    const Trajectory sub = euler_maruyama(f, 1.5, 0.0, 0.0, StepSchedule::constant(0.01), 2000, 50.0, RngStream{6, 0}, o);
    CHECK_FALSE(sub.blowup);
    CHECK(std::abs(sub.iterates.back() - 1.0) < 1e-6);
}

TEST_CASE("drift table reproduces the exact stencil") {
    const Potential f = quartic();
    const DriftApproxParams a{0.05, 200, 0, 0, false};
    IntegratorOptions o;
    o.drift_cap = 0.05;
    o.drift_table_step = 0.001;
    const StepSchedule sch = StepSchedule::constant(0.001);
    const Trajectory exact = simulate_afld(f, 1.5, 0.3, 1.0, a, sch, 2000, 0.0, RngStream{7, 0}, IntegratorOptions{.drift_cap = 0.05});
    const Trajectory table = simulate_afld(f, 1.5, 0.3, 1.0, a, sch, 2000, 0.0, RngStream{7, 0}, o);
    double worst = 0.0;
    for (std::size_t k = 0; k < exact.iterates.size(); ++k) worst = std::max(worst, std::abs(exact.iterates[k] - table.iterates[k]));
    CHECK(worst < 1e-6);
}

TEST_CASE("corrected dynamics are centred and target the Gibbs second moment") {
    const Potential f = quartic();
    const DriftApproxParams a{0.05, 200, 0, 0, false};
    IntegratorOptions o;
    o.drift_cap = 0.05;
    const Trajectory t = simulate_afld(f, 1.5, 0.0, 1.0, a, StepSchedule::constant(0.001), 200000, 0.0, RngStream{8, 0}, o);
    CHECK_FALSE(t.blowup);
    CHECK(std::abs(weighted_time_average(t, [](double w) { return w; }, 20000)) < 0.05);

    o.drift_table_step = 0.001;
    const double target = gibbs_expectation(GibbsSpec{f, 1.0, 1.5}, [](double w) { return w * w; });
    double mean = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SdeProblem pr;
        pr.potential = &f;
        pr.alpha = 1.5;
        pr.schedule = StepSchedule::constant(0.001);
        pr.n_steps = 2000000;
        pr.rng = RngStream{seed, 9};
        pr.drift = DriftKind::afld;
        pr.approx = a;
        pr.options = o;
        WeightedAverage avg([](double w) { return w * w; }, pr.n_steps / 10);
        const RunSummary s = run_sde(pr, [&](std::size_t k, double eta, double w) { avg(k, eta, w); });
        CHECK_FALSE(s.blowup);
        mean += avg.value() / 5.0;
    }
    CHECK(std::abs(mean - target) < 0.1);
}

TEST_CASE("weighted time averages") {
    Trajectory t;
    t.iterates = {0.5, 0.5, 0.5, 0.5};
    t.etas = {0.0, 0.3, 0.2, 0.1};
    CHECK(weighted_time_average(t, [](double w) { return w * w; }, 0) == doctest::Approx(0.25));
    const Trajectory r = euler_maruyama(quartic(), 1.5, 0.0, 1.0, StepSchedule::polynomial(0.05, 0.7), 3000, 0.0, RngStream{10, 0});
    CHECK(weighted_time_average(r, [](double) { return 1.0; }, 100) == 1.0);
    CHECK_THROWS_AS(weighted_time_average(r, [](double w) { return w; }, 3001), Error);
}
