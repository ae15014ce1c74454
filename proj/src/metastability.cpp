#include "levylab/metastability.hpp"

#include <cmath>
#include <sstream>

#include "levylab/analysis.hpp"
#include "levylab/error.hpp"
#include "levylab/stable.hpp"

namespace levylab {

void WellSpec::validate() const {
    require(delta_exit > 0.0, Errc::parameter_domain, "delta_exit must be positive");
    if (!(lower() < m && m < upper())) {
        std::ostringstream os;
        os << "well needs s_prev + delta < m < s_next - delta, got (" << s_prev << ", " << m << ", " << s_next
           << ") with delta " << delta_exit;
        fail(Errc::parameter_domain, os.str());
    }
}

WellSpec well_of(const Potential& potential, std::size_t index, double delta_exit) {
    const auto mins = potential.minima();
    const auto sads = potential.saddles();
    require(index < mins.size(), Errc::argument, "well index out of range");
    WellSpec w;
    w.m = mins[index];
    if (index > 0) w.s_prev = sads[index - 1];
    if (index < sads.size()) w.s_next = sads[index];
    w.delta_exit = delta_exit;
    w.validate();
    return w;
}

const char* exit_side_name(ExitSide side) noexcept {
    switch (side) {
        case ExitSide::left: return "left";
        case ExitSide::right: return "right";
        default: return "none";
    }
}

ExitRates exit_rates(const WellSpec& well, double epsilon, double alpha, double theta) {
    well.validate();
    require(alpha > 1.0 && alpha < 2.0, Errc::parameter_domain, "exit rates need alpha in (1, 2)");
    require(theta > -1.0 && theta < 1.0, Errc::parameter_domain, "exit rates need theta in (-1, 1)");
    require(epsilon > 0.0, Errc::parameter_domain, "exit rates need epsilon > 0");
    const double c = tail_constant(alpha);
    ExitRates r;
    if (std::isfinite(well.s_prev))
        r.left = 0.5 * (1.0 - theta) * c * std::pow(std::abs((well.s_prev - well.m) / epsilon), -alpha);
    if (std::isfinite(well.s_next))
        r.right = 0.5 * (1.0 + theta) * c * std::pow(std::abs((well.s_next - well.m) / epsilon), -alpha);
    return r;
}

double exit_rate_analytic(const WellSpec& well, double epsilon, double alpha, double theta) {
    const double r = exit_rates(well, epsilon, alpha, theta).total();
    require(r > 0.0, Errc::parameter_domain, "well has no finite boundary");
    return r;
}

ExitRecord simulate_exit(const Potential& f, const WellSpec& well, double epsilon, double alpha, double theta,
                         double dt, std::size_t max_steps, const RngStream& stream) {
    well.validate();
    require(alpha > 1.0 && alpha <= 2.0, Errc::parameter_domain, "exit simulation needs alpha in (1, 2]");
    require(theta >= -1.0 && theta <= 1.0, Errc::parameter_domain, "theta must lie in [-1, 1]");
    require(epsilon >= 0.0, Errc::parameter_domain, "epsilon must be nonnegative");
    require(dt > 0.0, Errc::parameter_domain, "dt must be positive");
    const double th = alpha == 2.0 ? 0.0 : theta;
    const double scale = epsilon * std::pow(dt, 1.0 / alpha);
    const double lo = well.lower(), hi = well.upper();
    Rng rng(stream);
    ExitRecord rec;
    rec.seed = stream;
    double w = well.m;
    for (std::size_t k = 1; k <= max_steps; ++k) {
        const double drift = -dt * f.gradient(w);
        const double noise = epsilon == 0.0 ? 0.0 : scale * sample_standard(alpha, th, rng);
        const double next = w + drift + noise;
        if (!(next >= lo && next <= hi)) {
            rec.steps = k;
            rec.exit_time = static_cast<double>(k) * dt;
            rec.side = next < lo ? ExitSide::left : ExitSide::right;
            rec.final_position = next;
            return rec;
        }
        if (next == w && noise == 0.0) break;
        w = next;
    }
    rec.censored = true;
    rec.steps = max_steps;
    rec.exit_time = static_cast<double>(max_steps) * dt;
    rec.final_position = w;
    return rec;
}

ExitLawResult exit_law_test(const std::vector<ExitRecord>& records, double rate) {
    require(rate > 0.0 && std::isfinite(rate), Errc::argument, "exit rate must be positive");
    ExitLawResult out;
    std::vector<double> scaled;
    for (const auto& r : records) {
        if (r.censored) ++out.censored;
        else scaled.push_back(rate * r.exit_time);
    }
    out.used = scaled.size();
    if (out.used < 500) {
        std::ostringstream os;
        os << "exit law test needs at least 500 uncensored records, got " << out.used;
        fail(Errc::insufficient_data, os.str());
    }
    out.censored_fraction = static_cast<double>(out.censored) / static_cast<double>(records.size());
    if (out.censored_fraction >= 0.05) {
        std::ostringstream os;
        os << "censored fraction " << out.censored_fraction << " is not below 5%";
        fail(Errc::insufficient_data, os.str());
    }
    double s = 0.0, s2 = 0.0;
    for (double x : scaled) {
        s += x;
        s2 += x * x;
    }
    const double n = static_cast<double>(out.used);
    out.mean_scaled = s / n;
    out.mean_standard_error = std::sqrt(std::max(0.0, (s2 / n - out.mean_scaled * out.mean_scaled) / (n - 1.0)));
    out.ks = ks_statistic(scaled, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); });
    out.critical = ks_critical_value(out.used, 0.01);
    out.p_value = ks_pvalue(out.ks, out.used);
    out.pass = out.ks < out.critical;
    return out;
}

ExitSideResult exit_side_test(const std::vector<ExitRecord>& records, const ExitRates& rates) {
    require(rates.total() > 0.0, Errc::argument, "rates must not both vanish");
    ExitSideResult out;
    for (const auto& r : records) {
        if (r.censored) continue;
        if (r.side == ExitSide::left) ++out.left;
        else if (r.side == ExitSide::right) ++out.right;
    }
    const std::size_t n = out.left + out.right;
    require(n > 0, Errc::insufficient_data, "no uncensored exits");
    out.predicted_right = rates.right / rates.total();
    if (out.predicted_right <= 0.0 || out.predicted_right >= 1.0) {
        const bool consistent = out.predicted_right <= 0.0 ? out.right == 0 : out.left == 0;
        out.p_value = consistent ? 1.0 : 0.0;
    } else {
        out.p_value = binomial_test(out.right, n, out.predicted_right);
    }
    out.pass = out.p_value >= 0.01;
    return out;
}

TransitionMatrix transition_matrix(const std::vector<double>& minima, const std::vector<double>& saddles,
                                   double alpha, double theta) {
    const std::size_t n = minima.size();
    require(n >= 1 && saddles.size() + 1 == n, Errc::parameter_domain, "need n minima and n - 1 saddles");
    for (std::size_t i = 0; i + 1 < n; ++i)
        require(minima[i] < saddles[i] && saddles[i] < minima[i + 1], Errc::parameter_domain,
                "minima and saddles must interlace");
    require(alpha > 0.0 && alpha <= 2.0, Errc::parameter_domain, "alpha must lie in (0, 2]");
    require(theta >= -1.0 && theta <= 1.0, Errc::parameter_domain, "theta must lie in [-1, 1]");
    // |s_j - m_i|^{-alpha} with s_0 = -inf and s_n = +inf contributing zero.
    auto reach = [&](std::size_t j, double m) {
        if (j == 0 || j == n) return 0.0;
        return std::pow(std::abs(saddles[j - 1] - m), -alpha);
    };
    TransitionMatrix t;
    t.n = n;
    t.q.assign(n * n, 0.0);
    t.rates.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = j < i ? 0.5 * (1.0 - theta) : 0.5 * (1.0 + theta);
            // 1-based saddle indices j-1 and j for target well j.
            const double v = w * std::abs(reach(j, minima[i]) - reach(j + 1, minima[i]));
            t.q[i * n + j] = v;
            row += v;
        }
        t.q[i * n + i] = -row;
        t.rates[i] = row;
    }
    return t;
}

Occupancy double_well_occupancy(double m1, double m2, double alpha, double theta) {
    require(m1 < 0.0 && m2 > 0.0, Errc::parameter_domain, "occupancy needs m1 < 0 < m2");
    require(alpha > 1.0 && alpha < 2.0, Errc::parameter_domain, "occupancy needs alpha in (1, 2)");
    require(theta > -1.0 && theta < 1.0, Errc::parameter_domain, "occupancy needs theta in (-1, 1)");
    const double ratio = (1.0 + theta) / (1.0 - theta) * std::pow(m2 / std::abs(m1), alpha);
    Occupancy o;
    o.pi1 = 1.0 / (1.0 + ratio);
    o.pi2 = ratio / (1.0 + ratio);
    return o;
}

OccupancyRun occupancy_fraction(const SdeProblem& problem, double threshold, std::size_t burn_in) {
    require(burn_in < problem.n_steps, Errc::argument, "burn-in must be shorter than the run");
    double total = 0.0, right = 0.0;
    auto obs = [&](std::size_t k, double eta, double w) {
        if (k <= burn_in) return;
        total += eta;
        if (w > threshold) right += eta;
    };
    const RunSummary s = run_sde(problem, obs);
    OccupancyRun out;
    out.steps = s.steps;
    out.blowup = s.blowup;
    out.right_fraction = total > 0.0 ? right / total : std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace levylab
