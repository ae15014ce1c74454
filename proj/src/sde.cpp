#include "levylab/sde.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>

#include "levylab/error.hpp"
#include "levylab/stable.hpp"

namespace levylab {

double StepSchedule::eta(std::size_t k) const noexcept {
    if (kind == ScheduleKind::constant || rho == 0.0) return eta0;
    return eta0 * std::pow(static_cast<double>(k), -rho);
}

void StepSchedule::validate() const {
    require(eta0 > 0.0 && std::isfinite(eta0), Errc::parameter_domain, "step size must be positive");
    require(rho >= 0.0, Errc::parameter_domain, "decay exponent must be nonnegative");
}

const char* drift_kind_name(DriftKind kind) noexcept {
    return kind == DriftKind::afld ? "afld" : "unmodified";
}

namespace {

constexpr int kMaxDriftSubsteps = 100000;

class DriftTable {
public:
    DriftTable(const DriftStencil& stencil, const Potential& f, double epsilon, double step, double radius)
        : lo_(-radius), hi_(radius) {
        const auto n = static_cast<std::size_t>(std::ceil(2.0 * radius / step)) + 1;
        require(n >= 4, Errc::parameter_domain, "drift table needs at least four nodes");
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = lo_ + (hi_ - lo_) * static_cast<double>(i) / static_cast<double>(n - 1);
            const LogDrift d = stencil.evaluate(f, epsilon, x[i]);
            require(d.max_exponent <= 700.0, Errc::drift_overflow, "drift table node overflows; shrink the radius");
            y[i] = d.value();
            require(std::isfinite(y[i]), Errc::numerical, "drift table node is not finite");
        }
        spline_.reset(gsl_spline_alloc(gsl_interp_cspline, n));
        acc_.reset(gsl_interp_accel_alloc());
        require(spline_ && acc_, Errc::numerical, "drift table allocation failed");
        require(gsl_spline_init(spline_.get(), x.data(), y.data(), n) == GSL_SUCCESS, Errc::numerical,
                "drift table spline setup failed");
    }

    bool covers(double w) const noexcept { return w >= lo_ && w <= hi_; }
    double operator()(double w) const noexcept { return gsl_spline_eval(spline_.get(), w, acc_.get()); }

private:
    struct SplineFree {
        void operator()(gsl_spline* s) const { gsl_spline_free(s); }
    };
    struct AccelFree {
        void operator()(gsl_interp_accel* a) const { gsl_interp_accel_free(a); }
    };
    double lo_, hi_;
    std::unique_ptr<gsl_spline, SplineFree> spline_;
    std::unique_ptr<gsl_interp_accel, AccelFree> acc_;
};

}  // namespace

RunSummary run_sde(const SdeProblem& pr, const StepObserver& observer, std::vector<double>* increments) {
    require(pr.potential != nullptr, Errc::argument, "SDE problem has no potential");
    require(pr.alpha > 1.0 && pr.alpha <= 2.0, Errc::parameter_domain, "SDE needs alpha in (1, 2]");
    require(pr.theta >= -1.0 && pr.theta <= 1.0, Errc::parameter_domain, "theta must lie in [-1, 1]");
    require(pr.epsilon >= 0.0 && std::isfinite(pr.epsilon), Errc::parameter_domain, "epsilon must be nonnegative");
    require(std::isfinite(pr.w0), Errc::parameter_domain, "initial point must be finite");
    require(pr.options.drift_cap > 0.0, Errc::parameter_domain, "drift cap must be positive");
    pr.schedule.validate();

    std::optional<DriftStencil> stencil;
    if (pr.drift == DriftKind::afld) {
        require(pr.epsilon > 0.0, Errc::parameter_domain, "fractional drift needs epsilon > 0");
        stencil.emplace(pr.alpha, pr.theta, pr.approx);
    }
    std::optional<DriftTable> table;
    if (stencil && pr.options.drift_table_step > 0.0) {
        require(pr.options.drift_table_radius > 0.0, Errc::parameter_domain, "drift table radius must be positive");
        table.emplace(*stencil, *pr.potential, pr.epsilon, pr.options.drift_table_step, pr.options.drift_table_radius);
    }
    const Potential& f = *pr.potential;
    const double theta = pr.alpha == 2.0 ? 0.0 : pr.theta;
    const double cap = pr.options.drift_cap;
    const bool capped = std::isfinite(cap);
    const bool constant = pr.schedule.kind == ScheduleKind::constant || pr.schedule.rho == 0.0;
    const double const_noise_scale = std::pow(pr.schedule.eta0, 1.0 / pr.alpha);

    // Drift as sign and log magnitude, so stencil values beyond double range stay usable.
    struct Drift {
        double value;
        double sign;
        double log_abs;
        bool finite;
    };
    std::string overflow;
    auto drift_at = [&](double x) -> Drift {
        double b;
        if (table && table->covers(x)) {
            b = (*table)(x);
        } else if (stencil) {
            const LogDrift d = stencil->evaluate(f, pr.epsilon, x);
            if (d.mantissa == 0.0) return {0.0, 0.0, -HUGE_VAL, true};
            if (d.max_exponent > 700.0) {
                std::ostringstream os;
                os << "drift overflow at stencil point " << d.argmax_point << " (exponent " << d.max_exponent << ")";
                overflow = os.str();
                return {0.0, std::copysign(1.0, d.mantissa), d.log_abs(), false};
            }
            b = d.value();
        } else {
            b = -f.gradient(x);
        }
        return {b, b == 0.0 ? 0.0 : std::copysign(1.0, b), std::log(std::abs(b)), true};
    };

    Rng rng(pr.rng);
    RunSummary out;
    double w = pr.w0;
    observer(0, 0.0, w);
    for (std::size_t k = 1; k <= pr.n_steps; ++k) {
        const double eta = pr.schedule.eta(k);
        double drifted = w;
        bool failed = false;
        if (!capped) {
            const Drift d = drift_at(w);
            if (d.finite) {
                drifted = w + eta * d.value;
            } else if (std::log(eta) + d.log_abs < 700.0) {
                drifted = w + d.sign * std::exp(std::log(eta) + d.log_abs);
            } else {
                failed = true;
            }
        } else {
            // Steps whose drift displacement exceeds cap * (1 + |w|) are split
            // into substeps of at most that length until eta is used up.
            double remaining = eta;
            for (int sub = 0; remaining > 0.0; ++sub) {
                if (sub == kMaxDriftSubsteps) {
                    overflow = "drift substeps exhausted";
                    failed = true;
                    break;
                }
                const Drift d = drift_at(drifted);
                if (d.sign == 0.0) break;
                const double log_limit = std::log(cap * (1.0 + std::abs(drifted)));
                const double log_disp = std::log(remaining) + d.log_abs;
                if (log_disp <= log_limit) {
                    drifted += d.finite ? remaining * d.value : d.sign * std::exp(log_disp);
                    break;
                }
                remaining -= std::exp(log_limit - d.log_abs);
                drifted += d.sign * std::exp(log_limit);
            }
        }
        if (failed) {
            out.blowup = true;
            out.blowup_step = k;
            out.blowup_reason = overflow;
            break;
        }
        double noise = 0.0;
        if (pr.epsilon != 0.0) {
            const double scale = constant ? const_noise_scale : std::pow(eta, 1.0 / pr.alpha);
            noise = pr.epsilon * (scale * sample_standard(pr.alpha, theta, rng));
        }
        const double next = drifted + noise;
        if (!std::isfinite(next) || std::abs(next) > pr.options.blowup_threshold) {
            std::ostringstream os;
            os << "iterate " << next << " left the region |w| <= " << pr.options.blowup_threshold;
            out.blowup = true;
            out.blowup_step = k;
            out.blowup_reason = os.str();
            break;
        }
        w = next;
        if (increments) increments->push_back(noise);
        observer(k, eta, w);
        out.steps = k;
    }
    out.final_value = w;
    return out;
}

namespace {

Trajectory record(const SdeProblem& pr) {
    Trajectory t;
    t.schedule = pr.schedule;
    t.seed = pr.rng;
    t.drift = pr.drift;
    t.alpha = pr.alpha;
    t.theta = pr.theta;
    t.epsilon = pr.epsilon;
    t.requested_steps = pr.n_steps;
    t.iterates.reserve(pr.n_steps + 1);
    t.etas.reserve(pr.n_steps + 1);
    auto obs = [&t](std::size_t, double eta, double w) {
        t.etas.push_back(eta);
        t.iterates.push_back(w);
    };
    const RunSummary s = run_sde(pr, obs, pr.options.record_increments ? &t.increments : nullptr);
    t.blowup = s.blowup;
    t.blowup_step = s.blowup_step;
    t.blowup_reason = s.blowup_reason;
    return t;
}

}  // namespace

Trajectory euler_maruyama(const Potential& potential, double alpha, double theta, double epsilon,
                          const StepSchedule& schedule, std::size_t n_steps, double w0, const RngStream& rng,
                          const IntegratorOptions& options) {
    SdeProblem pr;
    pr.potential = &potential;
    pr.alpha = alpha;
    pr.theta = theta;
    pr.epsilon = epsilon;
    pr.schedule = schedule;
    pr.n_steps = n_steps;
    pr.w0 = w0;
    pr.rng = rng;
    pr.options = options;
    return record(pr);
}

Trajectory simulate_afld(const Potential& potential, double alpha, double theta, double epsilon,
                         const DriftApproxParams& approx, const StepSchedule& schedule, std::size_t n_steps,
                         double w0, const RngStream& rng, const IntegratorOptions& options) {
    SdeProblem pr;
    pr.potential = &potential;
    pr.alpha = alpha;
    pr.theta = theta;
    pr.epsilon = epsilon;
    pr.schedule = schedule;
    pr.n_steps = n_steps;
    pr.w0 = w0;
    pr.rng = rng;
    pr.drift = DriftKind::afld;
    pr.approx = approx;
    pr.options = options;
    return record(pr);
}

void WeightedAverage::operator()(std::size_t k, double eta, double w) {
    if (k <= burn_in_ || k == 0) return;
    h_ += eta;
    s_ += eta * g_(w);
}

double WeightedAverage::value() const {
    require(h_ > 0.0, Errc::argument, "no iterates after the burn-in window");
    return s_ / h_;
}

double weighted_time_average(const Trajectory& traj, const std::function<double(double)>& g, std::size_t burn_in) {
    require(burn_in < traj.iterates.size(), Errc::argument, "burn-in must be shorter than the trajectory");
    WeightedAverage avg(g, burn_in);
    for (std::size_t k = 0; k < traj.iterates.size(); ++k) avg(k, traj.etas[k], traj.iterates[k]);
    return avg.value();
}

}  // namespace levylab
