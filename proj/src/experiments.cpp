#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <json.hpp>
#include <thread>

#include "levylab/analysis.hpp"
#include "levylab/descriptive.hpp"
#include "levylab/error.hpp"
#include "levylab/fracdrift.hpp"
#include "levylab/gni.hpp"
#include "levylab/metastability.hpp"
#include "levylab/potentials.hpp"
#include "levylab/sde.hpp"
#include "levylab/stable.hpp"

namespace levylab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Job {
    std::uint64_t seed;
    std::uint64_t replication;
    RngStream stream() const noexcept { return {seed, replication}; }
};

std::vector<Job> make_jobs(const ExperimentConfig& cfg) {
    std::vector<Job> jobs;
    for (auto s : cfg.seeds())
        for (std::size_t r = 0; r < cfg.replications(); ++r) jobs.push_back({s, r});
    return jobs;
}

// Results are stored by job index, so aggregation ignores completion order.
template <class R>
std::vector<R> run_jobs(const std::vector<Job>& jobs, std::size_t workers, const std::function<R(const Job&)>& fn) {
    std::vector<R> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                results[i] = fn(jobs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(workers, jobs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

class Csv {
public:
    Csv(const fs::path& path, const std::string& header) : path_(path) {
        f_ = std::fopen(path.c_str(), "w");
        if (!f_) fail(Errc::io, "cannot write '" + path.string() + "'");
        std::fprintf(f_, "%s\n", header.c_str());
    }
    ~Csv() {
        if (f_) std::fclose(f_);
    }
    Csv(const Csv&) = delete;
    Csv& operator=(const Csv&) = delete;

    Csv& num(double v) { return field(fmt(v)); }
    Csv& integer(long long v) { return field(std::to_string(v)); }
    Csv& text(const std::string& s) { return field(s); }
    void end() {
        std::fputc('\n', f_);
        first_ = true;
    }

    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

private:
    Csv& field(const std::string& s) {
        if (!first_) std::fputc(',', f_);
        std::fputs(s.c_str(), f_);
        first_ = false;
        return *this;
    }

    fs::path path_;
    std::FILE* f_ = nullptr;
    bool first_ = true;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) fail(Errc::io, "cannot write '" + path.string() + "'");
    f << text;
    if (!f) fail(Errc::io, "write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json stream_json(const RngStream& s) { return {{"seed", s.seed}, {"id", s.id}}; }

json stable_json(const StableParams& p) {
    return {{"alpha", p.alpha}, {"sigma", p.sigma}, {"theta", p.theta}, {"mu", p.mu}};
}

std::size_t count_param(const ExperimentConfig& cfg, const std::string& key, std::int64_t min = 1) {
    const auto v = cfg.integer(key);
    if (v < min) fail(Errc::config, key + " must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
}

Potential make_potential(const ExperimentConfig& cfg) {
    const std::string kind = cfg.text("potential");
    if (kind == "quartic") return quartic();
    if (kind == "double-well")
        return asymmetric_double_well(cfg.real("m1"), cfg.real("s1"), cfg.real("m2"), cfg.real("c"));
    return polynomial_wells(cfg.reals("critical_points"), cfg.real("c"));
}

StepSchedule make_schedule(const ExperimentConfig& cfg) {
    StepSchedule s = cfg.text("schedule") == "polynomial" ? StepSchedule::polynomial(cfg.real("eta"), cfg.real("rho"))
                                                          : StepSchedule::constant(cfg.real("eta"));
    s.validate();
    return s;
}

DriftApproxParams make_approx(const ExperimentConfig& cfg) {
    DriftApproxParams a;
    a.h = cfg.real("h");
    a.K = static_cast<int>(cfg.integer("K"));
    a.p = static_cast<int>(cfg.integer("p"));
    a.q = static_cast<int>(cfg.integer("q"));
    a.at_h0 = cfg.boolean("use_h0");
    a.validate();
    return a;
}

SdeProblem make_problem(const ExperimentConfig& cfg, const Potential& f, DriftKind drift, const RngStream& stream) {
    SdeProblem p;
    p.potential = &f;
    p.alpha = cfg.real("alpha");
    p.theta = cfg.real("theta");
    p.epsilon = cfg.real("eps");
    p.schedule = make_schedule(cfg);
    p.n_steps = count_param(cfg, "steps");
    p.w0 = cfg.real("w0");
    p.rng = stream;
    p.drift = drift;
    if (drift == DriftKind::afld) {
        p.approx = make_approx(cfg);
        p.options.drift_table_step = cfg.real("drift_table_step");
        p.options.drift_table_radius = cfg.real("drift_table_radius");
    }
    p.options.drift_cap = cfg.real("drift_cap");
    p.options.blowup_threshold = cfg.real("blowup_threshold");
    return p;
}

json approx_json(const ExperimentConfig& cfg) {
    const DriftApproxParams a = make_approx(cfg);
    const double h = a.at_h0 ? levylab::h0(cfg.real("alpha"), cfg.real("eps")) : a.h;
    return {{"h", h},
            {"K", a.K},
            {"p", a.p},
            {"q", a.q},
            {"use_h0", a.at_h0},
            {"stencil_half_span", h * a.K},
            {"drift_table_step", cfg.real("drift_table_step")},
            {"drift_table_radius", cfg.real("drift_table_radius")}};
}

std::string job_tag(const Job& j) { return "s" + std::to_string(j.seed) + "_r" + std::to_string(j.replication); }

// Each command writes its files into dir and returns the summary.
using Command = std::function<json(const ExperimentConfig&, const std::vector<Job>&, const fs::path&)>;

json cmd_stable_sample(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const StableParams p{cfg.real("alpha"), cfg.real("sigma"), cfg.real("theta"), cfg.real("mu")};
    p.validate();
    const std::size_t n = count_param(cfg, "n");
    auto draws = run_jobs<std::vector<double>>(jobs, cfg.workers(), [&](const Job& j) { return sample(p, j.stream(), n); });
    Csv csv(dir / "samples.csv", "seed,replication,index,value");
    json per = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        for (std::size_t k = 0; k < n; ++k)
            csv.integer(jobs[i].seed).integer(jobs[i].replication).integer(k).num(draws[i][k]).end();
        const auto s = sorted_copy(draws[i]);
        per.push_back({{"seed", jobs[i].seed},
                       {"replication", jobs[i].replication},
                       {"median", quantile_sorted(s, 0.5)},
                       {"q05", quantile_sorted(s, 0.05)},
                       {"q95", quantile_sorted(s, 0.95)}});
    }
    return {{"params", stable_json(p)}, {"n", n}, {"replicates", per}};
}

std::vector<double> read_samples(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Errc::io, "cannot read samples file '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto field = line.substr(0, line.find(','));
        if (field.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            std::size_t pos = 0;
            const double v = std::stod(field, &pos);
            out.push_back(v);
        } catch (...) {
            if (lineno == 1) continue;
            fail(Errc::config, path + ":" + std::to_string(lineno) + ": not a number");
        }
    }
    return out;
}

json fit_json(const StableFit& fit) {
    return {{"params", stable_json(fit.params)},
            {"standard_error", stable_json(fit.standard_error)},
            {"initial", stable_json(fit.initial)},
            {"loglik", fit.loglik},
            {"converged", fit.converged},
            {"evaluations", fit.evaluations}};
}

json cmd_stable_fit(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    FitOptions fo;
    fo.fit_mu = cfg.boolean("fit_mu");
    fo.standard_errors = cfg.boolean("standard_errors");
    json fits = json::array();
    json summary;
    if (!cfg.text("input").empty()) {
        const auto x = read_samples(cfg.text("input"));
        json f = fit_json(mle_fit(x, fo));
        f["n"] = x.size();
        f["input"] = cfg.text("input");
        fits.push_back(f);
    } else {
        const StableParams p{cfg.real("alpha"), cfg.real("sigma"), cfg.real("theta"), cfg.real("mu")};
        p.validate();
        const std::size_t n = count_param(cfg, "n");
        summary["generating"] = stable_json(p);
        auto res = run_jobs<json>(jobs, cfg.workers(), [&](const Job& j) {
            json f = fit_json(mle_fit(sample(p, j.stream(), n), fo));
            f["seed"] = j.seed;
            f["replication"] = j.replication;
            f["n"] = n;
            return f;
        });
        for (auto& f : res) fits.push_back(std::move(f));
    }
    write_json(dir / "fit.json", fits);
    summary["fits"] = fits;
    return summary;
}

json cmd_trajectory(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir, DriftKind drift) {
    const Potential f = make_potential(cfg);
    auto res = run_jobs<Trajectory>(jobs, cfg.workers(), [&](const Job& j) {
        const SdeProblem p = make_problem(cfg, f, drift, j.stream());
        return drift == DriftKind::afld
                   ? simulate_afld(f, p.alpha, p.theta, p.epsilon, p.approx, p.schedule, p.n_steps, p.w0, p.rng,
                                   p.options)
                   : euler_maruyama(f, p.alpha, p.theta, p.epsilon, p.schedule, p.n_steps, p.w0, p.rng, p.options);
    });
    json per = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Trajectory& t = res[i];
        const std::string tag = job_tag(jobs[i]);
        {
            Csv csv(dir / ("trajectory_" + tag + ".csv"), "k,eta,w");
            for (std::size_t k = 0; k < t.iterates.size(); ++k) csv.integer(k).num(t.etas[k]).num(t.iterates[k]).end();
        }
        const std::size_t burn = t.iterates.size() / 10;
        double wm = std::numeric_limits<double>::quiet_NaN();
        if (t.iterates.size() > burn + 1) wm = weighted_time_average(t, [](double w) { return w * w; }, burn);
        json side{{"seed", stream_json(t.seed)},
                  {"drift", drift_kind_name(t.drift)},
                  {"potential", f.name()},
                  {"alpha", t.alpha},
                  {"theta", t.theta},
                  {"eps", t.epsilon},
                  {"eta", t.schedule.eta0},
                  {"rho", t.schedule.rho},
                  {"requested_steps", t.requested_steps},
                  {"steps", t.iterates.size() - 1},
                  {"w0", t.iterates.front()},
                  {"blowup", t.blowup},
                  {"blowup_step", t.blowup_step},
                  {"blowup_reason", t.blowup_reason},
                  {"final_value", t.iterates.back()},
                  {"burn_in", burn},
                  {"weighted_mean_w2", wm}};
        if (drift == DriftKind::afld) side["approx"] = approx_json(cfg);
        write_json(dir / ("trajectory_" + tag + ".json"), side);
        side["replication"] = jobs[i].replication;
        per.push_back(side);
    }
    return {{"runs", per}};
}

json cmd_mode_shift(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const Potential f = make_potential(cfg);
    const DriftKind drift = cfg.text("drift") == "afld" ? DriftKind::afld : DriftKind::unmodified;
    UniformGrid grid{cfg.real("grid_lo"), cfg.real("grid_hi"), count_param(cfg, "grid_n", 3)};
    grid.validate();
    const double burn_frac = cfg.real("burn_in");
    if (!(burn_frac >= 0.0 && burn_frac < 1.0)) fail(Errc::config, "burn_in must lie in [0, 1)");
    const std::string bw = cfg.text("bandwidth");
    std::optional<double> fixed;
    if (bw != "auto") {
        double h = 0.0;
        try {
            std::size_t pos = 0;
            h = std::stod(bw, &pos);
            if (pos != bw.size()) throw std::invalid_argument("trailing");
        } catch (...) {
            fail(Errc::config, "bandwidth must be 'auto' or a positive number");
        }
        if (!(h > 0.0)) fail(Errc::config, "bandwidth must be 'auto' or a positive number");
        fixed = h;
    }
    const auto reference = f.minima();
    const double prominence = cfg.real("prominence"), radius = cfg.real("match_radius");
    struct Out {
        DensityEstimate density;
        RunSummary run;
        std::size_t burn = 0;
    };
    auto res = run_jobs<Out>(jobs, cfg.workers(), [&](const Job& j) {
        const SdeProblem p = make_problem(cfg, f, drift, j.stream());
        Out o;
        o.burn = static_cast<std::size_t>(std::floor(burn_frac * static_cast<double>(p.n_steps)));
        if (fixed) {
            const double h = *fixed;
            const double dx = std::min(grid.step(), h / 16.0);
            LinearBinner bins(grid.lo - std::ceil(8.0 * h / dx + 1.0) * dx, grid.hi + 8.0 * h + 2.0 * dx, dx);
            o.run = run_sde(p, [&](std::size_t k, double, double w) {
                if (k > o.burn) bins.add(w);
            });
            require(bins.count() >= 100, Errc::insufficient_data, "fewer than 100 post-burn-in iterates");
            o.density = kde_binned(bins, grid, h);
        } else {
            std::vector<double> kept;
            kept.reserve(p.n_steps - o.burn);
            o.run = run_sde(p, [&](std::size_t k, double, double w) {
                if (k > o.burn) kept.push_back(w);
            });
            o.density = kde(kept, grid);
        }
        return o;
    });
    Csv csv(dir / "density.csv", "seed,replication,w,density");
    json per = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Out& o = res[i];
        for (std::size_t k = 0; k < grid.n; ++k)
            csv.integer(jobs[i].seed).integer(jobs[i].replication).num(grid.at(k)).num(o.density.values[k]).end();
        const auto modes = find_modes(o.density, prominence);
        const auto report = mode_shift(modes, reference, radius);
        json matches = json::array();
        for (const auto& m : report.matches)
            matches.push_back({{"reference", m.reference},
                               {"nearest", m.nearest},
                               {"displacement", m.nearest - m.reference},
                               {"distance", std::isfinite(m.distance) ? json(m.distance) : json(nullptr)},
                               {"matched", m.matched}});
        per.push_back({{"seed", jobs[i].seed},
                       {"replication", jobs[i].replication},
                       {"bandwidth", o.density.bandwidth},
                       {"bandwidth_rule", fixed ? "fixed" : "silverman"},
                       {"burn_in", o.burn},
                       {"samples", o.density.sample_count},
                       {"captured_mass", o.density.captured_mass},
                       {"blowup", o.run.blowup},
                       {"steps", o.run.steps},
                       {"modes", modes},
                       {"matches", matches},
                       {"unmatched", report.unmatched}});
    }
    json report{{"drift", drift_kind_name(drift)},
                {"potential", f.name()},
                {"reference_modes", reference},
                {"match_radius", radius},
                {"prominence", prominence},
                {"replicates", per}};
    if (drift == DriftKind::afld) report["approx"] = approx_json(cfg);
    write_json(dir / "modes.json", report);
    return report;
}

json cmd_drift_check(const ExperimentConfig& cfg, const std::vector<Job>&, const fs::path& dir) {
    const Potential f = make_potential(cfg);
    const double alpha = cfg.real("alpha"), eps = cfg.real("eps"), theta = cfg.real("theta");
    const double lo = cfg.real("lo"), hi = cfg.real("hi");
    const std::size_t n = count_param(cfg, "points", 2);
    if (!(hi > lo)) fail(Errc::config, "hi must exceed lo");
    const auto approx = DriftApproxParams::gradient_reduction(alpha);
    Csv csv(dir / "drift.csv", "w,drift,neg_gradient,abs_error");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double b = drift_b(w, f, eps, alpha, theta, approx);
        const double err = std::abs(b + f.gradient(w));
        worst = std::max(worst, err);
        csv.num(w).num(b).num(-f.gradient(w)).num(err).end();
    }
    return {{"h0", levylab::h0(alpha, eps)}, {"K", 0}, {"points", n}, {"max_abs_error", worst}};
}

json cmd_frac_converge(const ExperimentConfig& cfg, const std::vector<Job>&, const fs::path& dir) {
    const double gamma = cfg.real("gamma"), theta = cfg.real("theta"), w = cfg.real("w");
    const int K = static_cast<int>(count_param(cfg, "K"));
    const int p = static_cast<int>(cfg.integer("p")), q = static_cast<int>(cfg.integer("q"));
    const ScalarFn f = [](double x) { return std::exp(-x * x); };
    const auto table = convergence_study(f, gamma, theta, cfg.reals("h_list"), K, p, q, w);
    {
        Csv csv(dir / "convergence.csv", "h,K,approx,exact,error");
        for (const auto& r : table.rows) csv.num(r.h).integer(r.K).num(r.approx).num(table.exact).num(r.error).end();
    }
    const double th = cfg.real("truncation_h");
    const int kshort = static_cast<int>(count_param(cfg, "truncation_K"));
    auto err_at = [&](int k) {
        return std::abs(riesz_feller_approx(f, w, gamma, theta, DriftApproxParams{th, k, p, q, false}) - table.exact);
    };
    const double e_long = err_at(K), e_short = err_at(kshort);
    return {{"gamma", gamma},
            {"theta", theta},
            {"w", w},
            {"exact", table.exact},
            {"slope", table.slope},
            {"truncation", {{"h", th}, {"K_long", K}, {"K_short", kshort}, {"error_long", e_long},
                            {"error_short", e_short}, {"increases", e_short > e_long}}}};
}

json cmd_exit_time(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const Potential f = make_potential(cfg);
    const std::size_t well = count_param(cfg, "well", 0);
    const double alpha = cfg.real("alpha"), theta = cfg.real("theta"), eps = cfg.real("eps"), dt = cfg.real("dt");
    const std::size_t max_steps = count_param(cfg, "max_steps"), runs = count_param(cfg, "runs");
    const auto deltas = cfg.reals("delta_exit");
    if (deltas.empty()) fail(Errc::config, "delta_exit needs at least one value");
    std::vector<WellSpec> wells;
    for (double d : deltas) wells.push_back(well_of(f, well, d));
    auto res = run_jobs<std::vector<std::vector<ExitRecord>>>(jobs, cfg.workers(), [&](const Job& j) {
        std::vector<std::vector<ExitRecord>> out(wells.size());
        for (std::size_t d = 0; d < wells.size(); ++d)
            for (std::size_t r = 0; r < runs; ++r)
                out[d].push_back(simulate_exit(f, wells[d], eps, alpha, theta, dt, max_steps,
                                               j.stream().child(d).child(r)));
        return out;
    });
    {
        Csv csv(dir / "exits.csv", "seed,replication,stream_seed,stream_id,delta,exit_time,side,censored,steps");
        for (std::size_t i = 0; i < jobs.size(); ++i)
            for (std::size_t d = 0; d < wells.size(); ++d)
                for (const auto& r : res[i][d])
                    csv.integer(jobs[i].seed)
                        .integer(jobs[i].replication)
                        .text(std::to_string(r.seed.seed))
                        .text(std::to_string(r.seed.id))
                        .num(deltas[d])
                        .num(r.exit_time)
                        .text(exit_side_name(r.side))
                        .integer(r.censored ? 1 : 0)
                        .integer(r.steps)
                        .end();
    }
    json per = json::array();
    for (std::size_t d = 0; d < wells.size(); ++d) {
        std::vector<ExitRecord> all;
        for (const auto& r : res) all.insert(all.end(), r[d].begin(), r[d].end());
        const ExitRates rates = exit_rates(wells[d], eps, alpha, theta);
        json e{{"delta_exit", deltas[d]},
               {"well", {{"s_prev", std::isfinite(wells[d].s_prev) ? json(wells[d].s_prev) : json(nullptr)},
                         {"m", wells[d].m},
                         {"s_next", std::isfinite(wells[d].s_next) ? json(wells[d].s_next) : json(nullptr)}}},
               {"rate_left", rates.left},
               {"rate_right", rates.right},
               {"analytic_rate", rates.total()},
               {"records", all.size()}};
        try {
            const auto law = exit_law_test(all, rates.total());
            e["law"] = {{"used", law.used},
                        {"censored", law.censored},
                        {"censored_fraction", law.censored_fraction},
                        {"empirical_mean_scaled", law.mean_scaled},
                        {"mean_standard_error", law.mean_standard_error},
                        {"ks", law.ks},
                        {"critical_1pct", law.critical},
                        {"p_value", law.p_value},
                        {"pass", law.pass}};
        } catch (const Error& err) {
            e["law"] = {{"error", errc_name(err.code())}, {"message", err.what()}};
        }
        try {
            const auto side = exit_side_test(all, rates);
            e["side"] = {{"left", side.left},
                         {"right", side.right},
                         {"predicted_right", side.predicted_right},
                         {"p_value", side.p_value},
                         {"pass", side.pass}};
        } catch (const Error& err) {
            e["side"] = {{"error", errc_name(err.code())}, {"message", err.what()}};
        }
        per.push_back(e);
    }
    json summary{{"potential", f.name()}, {"alpha", alpha}, {"theta", theta}, {"eps", eps}, {"dt", dt},
                 {"runs_per_replicate", runs}, {"margins", per}};
    write_json(dir / "exit_summary.json", summary);
    return summary;
}

json cmd_occupancy(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const double m1 = cfg.real("m1"), s1 = cfg.real("s1"), m2 = cfg.real("m2");
    const Potential f = asymmetric_double_well(m1, s1, m2, cfg.real("c"));
    const double alpha = cfg.real("alpha"), theta = cfg.real("theta");
    const std::size_t steps = count_param(cfg, "steps");
    const double burn_frac = cfg.real("burn_in");
    if (!(burn_frac >= 0.0 && burn_frac < 1.0)) fail(Errc::config, "burn_in must lie in [0, 1)");
    const auto burn = static_cast<std::size_t>(std::floor(burn_frac * static_cast<double>(steps)));
    const Occupancy pred = double_well_occupancy(m1 - s1, m2 - s1, alpha, theta);
    auto res = run_jobs<OccupancyRun>(jobs, cfg.workers(), [&](const Job& j) {
        SdeProblem p;
        p.potential = &f;
        p.alpha = alpha;
        p.theta = theta;
        p.epsilon = cfg.real("eps");
        p.schedule = StepSchedule::constant(cfg.real("eta"));
        p.schedule.validate();
        p.n_steps = steps;
        p.w0 = cfg.real("w0");
        p.rng = j.stream();
        p.options.drift_cap = cfg.real("drift_cap");
        p.options.blowup_threshold = cfg.real("blowup_threshold");
        return occupancy_fraction(p, s1, burn);
    });
    json per = json::array();
    double sum = 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        per.push_back({{"seed", jobs[i].seed},
                       {"replication", jobs[i].replication},
                       {"right_fraction", res[i].right_fraction},
                       {"steps", res[i].steps},
                       {"blowup", res[i].blowup}});
        if (!res[i].blowup && std::isfinite(res[i].right_fraction)) {
            sum += res[i].right_fraction;
            ++ok;
        }
    }
    const double mean = ok ? sum / static_cast<double>(ok) : std::numeric_limits<double>::quiet_NaN();
    json out{{"predicted_pi1", pred.pi1},
             {"predicted_pi2", pred.pi2},
             {"mean_right_fraction", mean},
             {"abs_error", std::abs(mean - pred.pi2)},
             {"burn_in", burn},
             {"replicates", per}};
    write_json(dir / "occupancy.json", out);
    return out;
}

struct GniSetup {
    NetworkSpec spec;
    NoiseSpec noise;
    std::size_t n_points;
    std::vector<double> q_list;
};

GniSetup gni_setup(const ExperimentConfig& cfg) {
    GniSetup g;
    g.spec.widths.clear();
    for (auto w : cfg.integers("widths")) {
        if (w < 1) fail(Errc::config, "widths must be positive");
        g.spec.widths.push_back(static_cast<std::size_t>(w));
    }
    const std::string act = cfg.text("activation");
    g.spec.activation = act == "relu" ? Activation::relu : act == "elu" ? Activation::elu : Activation::linear;
    g.spec.loss = cfg.text("loss") == "mse" ? LossKind::mse : LossKind::cross_entropy;
    g.spec.bias = cfg.boolean("bias");
    g.spec.validate();
    const NoiseMode mode = cfg.text("mode") == "additive" ? NoiseMode::additive : NoiseMode::multiplicative;
    g.noise = NoiseSpec::uniform(mode, g.spec.layers(), cfg.real("variance"));
    g.noise.validate(g.spec);
    g.n_points = count_param(cfg, "n_points");
    g.q_list = cfg.reals("q_list");
    return g;
}

// Init from child 0, data from child 1, injections from child 2.
struct GniJob {
    Network net;
    Dataset data;
};

GniJob gni_job(const GniSetup& g, const Job& j) {
    NetworkSpec spec = g.spec;
    spec.init = j.stream().child(0);
    Rng data_rng(j.stream().child(1));
    return {Network(spec), sinusoid_dataset(g.n_points, g.q_list, data_rng)};
}

json gni_meta(const GniSetup& g) {
    return {{"widths", g.spec.widths},
            {"activation", activation_name(g.spec.activation)},
            {"loss", loss_name(g.spec.loss)},
            {"bias", g.spec.bias},
            {"mode", noise_mode_name(g.noise.mode)},
            {"variances", g.noise.variances},
            {"n_points", g.n_points},
            {"q_list", g.q_list}};
}

json profile_json(const std::vector<double>& v, int m_max) {
    const auto sk = skew_kurtosis(v);
    json j{{"count", v.size()}, {"skewness", sk.skewness}, {"excess_kurtosis", sk.excess_kurtosis}};
    try {
        const auto mp = moment_profile(v, m_max);
        j["orders"] = mp.orders;
        j["norms"] = mp.norms;
        j["r_hat"] = mp.r_hat;
        j["fit_residual"] = mp.residual;
        j["loglog_slope"] = mp.loglog_slope;
    } catch (const Error& e) {
        j["moment_profile_error"] = e.what();
    }
    return j;
}

json cmd_gni_profile(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const GniSetup g = gni_setup(cfg);
    const std::size_t M = count_param(cfg, "M"), draws = count_param(cfg, "draws");
    const int m_max = static_cast<int>(count_param(cfg, "m_max", 2));
    auto res = run_jobs<GradientNoiseSample>(jobs, cfg.workers(), [&](const Job& j) {
        const GniJob gj = gni_job(g, j);
        Rng rng(j.stream().child(2));
        return implicit_gradient_noise_batch(gj.net, g.noise, gj.data, M, draws, rng);
    });
    if (cfg.boolean("write_samples")) {
        Csv csv(dir / "noise.csv", "seed,replication,layer,in_idx,out_idx,value,draw_id");
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            const auto& s = res[i];
            for (std::size_t d = 0; d < s.draws; ++d)
                for (std::size_t l = 1; l < s.widths.size(); ++l)
                    for (std::size_t out = 0; out < s.widths[l]; ++out)
                        for (std::size_t in = 0; in < s.widths[l - 1]; ++in)
                            csv.integer(jobs[i].seed)
                                .integer(jobs[i].replication)
                                .integer(l)
                                .integer(in)
                                .integer(out)
                                .num(s.at(d, l, in, out))
                                .integer(d)
                                .end();
        }
    }
    json per = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& s = res[i];
        json layers = json::array();
        for (std::size_t l = 1; l < s.widths.size(); ++l) {
            json lj = profile_json(s.layer_values(l), m_max);
            lj["layer"] = l;
            layers.push_back(lj);
        }
        per.push_back({{"seed", jobs[i].seed},
                       {"replication", jobs[i].replication},
                       {"dataset_id", s.dataset_id},
                       {"noise_stream", stream_json(s.seed)},
                       {"pooled", profile_json(s.values, m_max)},
                       {"layers", layers}});
    }
    json out{{"network", gni_meta(g)}, {"M", M}, {"draws", draws}, {"replicates", per}};
    write_json(dir / "profile.json", out);
    return out;
}

TrainOptions train_options(const ExperimentConfig& cfg) {
    TrainOptions o;
    o.steps = count_param(cfg, "steps");
    o.learning_rate = cfg.real("lr");
    o.final_window = cfg.real("final_window");
    return o;
}

void write_curve_rows(Csv& csv, const Job& j, const LossCurve& c) {
    for (std::size_t s = 0; s < c.loss.size(); ++s) {
        const double obj = s == 0 ? std::numeric_limits<double>::quiet_NaN() : c.objective[s - 1];
        csv.integer(j.seed).integer(j.replication).integer(s).num(c.loss[s]).num(obj).end();
    }
}

json curve_json(const Job& j, const LossCurve& c) {
    return {{"seed", j.seed},
            {"replication", j.replication},
            {"final_loss", c.final_loss},
            {"initial_loss", c.loss.front()},
            {"steps_completed", c.loss.size() - 1},
            {"diverged", c.diverged},
            {"diverged_step", c.diverged_step}};
}

json mean_final(const std::vector<json>& per) {
    double s = 0.0;
    for (const auto& p : per) s += p["final_loss"].get<double>();
    return per.empty() ? json(nullptr) : json(s / static_cast<double>(per.size()));
}

json cmd_gni_train(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const GniSetup g = gni_setup(cfg);
    const std::size_t M = count_param(cfg, "M");
    const TrainOptions o = train_options(cfg);
    auto res = run_jobs<LossCurve>(jobs, cfg.workers(), [&](const Job& j) {
        GniJob gj = gni_job(g, j);
        return train_marginalized(std::move(gj.net), g.noise, gj.data, M, o, j.stream().child(2));
    });
    Csv csv(dir / "loss.csv", "seed,replication,step,loss,objective");
    std::vector<json> per;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        write_curve_rows(csv, jobs[i], res[i]);
        per.push_back(curve_json(jobs[i], res[i]));
    }
    return {{"network", gni_meta(g)}, {"M", M}, {"learning_rate", o.learning_rate},
            {"final_window", o.final_window}, {"mean_final_loss", mean_final(per)}, {"replicates", per}};
}

json cmd_gni_substitute(const ExperimentConfig& cfg, const std::vector<Job>& jobs, const fs::path& dir) {
    const GniSetup g = gni_setup(cfg);
    const std::size_t M_big = count_param(cfg, "M_big");
    SubstituteOptions sub;
    const std::string model = cfg.text("model");
    sub.model = model == "stable" ? NoiseModelKind::stable
                : model == "gaussian" ? NoiseModelKind::gaussian
                                      : NoiseModelKind::none;
    sub.refit_every = count_param(cfg, "refit_every");
    sub.M_small = count_param(cfg, "M_small");
    const TrainOptions o = train_options(cfg);
    auto res = run_jobs<SubstituteCurve>(jobs, cfg.workers(), [&](const Job& j) {
        GniJob gj = gni_job(g, j);
        return substitute_noise_training(std::move(gj.net), g.noise, gj.data, M_big, sub, o, j.stream().child(2));
    });
    std::vector<json> per;
    {
        Csv csv(dir / "loss.csv", "seed,replication,step,loss,objective");
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            write_curve_rows(csv, jobs[i], res[i].curve);
            json p = curve_json(jobs[i], res[i].curve);
            p["fits"] = res[i].fits.size();
            per.push_back(p);
        }
    }
    Csv fits(dir / "fits.csv", "seed,replication,step,alpha,sigma,theta,mu");
    for (std::size_t i = 0; i < jobs.size(); ++i)
        for (const auto& f : res[i].fits)
            fits.integer(jobs[i].seed)
                .integer(jobs[i].replication)
                .integer(f.step)
                .num(f.params.alpha)
                .num(f.params.sigma)
                .num(f.params.theta)
                .num(f.params.mu)
                .end();
    return {{"network", gni_meta(g)},    {"model", noise_model_name(sub.model)}, {"M_big", M_big},
            {"M_small", sub.M_small},    {"refit_every", sub.refit_every},     {"learning_rate", o.learning_rate},
            {"final_window", o.final_window}, {"mean_final_loss", mean_final(per)}, {"replicates", per}};
}

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> table = {
        {"stable-sample", cmd_stable_sample},
        {"stable-fit", cmd_stable_fit},
        {"simulate", [](const auto& c, const auto& j, const auto& d) { return cmd_trajectory(c, j, d, DriftKind::unmodified); }},
        {"afld", [](const auto& c, const auto& j, const auto& d) { return cmd_trajectory(c, j, d, DriftKind::afld); }},
        {"mode-shift", cmd_mode_shift},
        {"drift-check", cmd_drift_check},
        {"frac-converge", cmd_frac_converge},
        {"exit-time", cmd_exit_time},
        {"occupancy", cmd_occupancy},
        {"gni-profile", cmd_gni_profile},
        {"gni-train", cmd_gni_train},
        {"gni-substitute", cmd_gni_substitute},
    };
    return table;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    const auto it = commands().find(cfg.subcommand());
    if (it == commands().end()) fail(Errc::config, "unknown subcommand '" + cfg.subcommand() + "'");
    const std::vector<Job> jobs = make_jobs(cfg);
    const fs::path dir = cfg.output_dir();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(Errc::io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    write_text(dir / "config.resolved.ini", cfg.resolved_ini());
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    json summary = it->second(cfg, jobs, dir);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json seeds = json::array();
    for (auto s : cfg.seeds()) seeds.push_back(s);
    json files = json::array();
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "metadata.json") files.push_back(e.path().filename().string());
    std::sort(files.begin(), files.end());
    json meta{{"tool", "levylab"},
              {"version", kVersion},
              {"subcommand", cfg.subcommand()},
              {"seeds", seeds},
              {"replications", cfg.replications()},
              {"workers", cfg.workers()},
              {"jobs", jobs.size()},
              {"started_utc", started},
              {"elapsed_seconds", elapsed},
              {"files", files},
              {"summary", summary}};
    write_json(dir / "metadata.json", meta);
    return {dir.string(), summary.dump()};
}

}  // namespace levylab
