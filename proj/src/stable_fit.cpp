#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "levylab/descriptive.hpp"
#include "levylab/stable.hpp"

namespace levylab {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

struct QuantileNode {
    double alpha, theta;
    double nu_alpha, nu_beta, median, iqr;
};

// Standardized quantile summaries on an (alpha, theta >= 0) lattice.
const std::vector<QuantileNode>& quantile_lattice() {
    static std::once_flag once;
    static std::vector<QuantileNode> nodes;
    std::call_once(once, [] {
        std::vector<double> alphas{1.01};
        for (int k = 1; k <= 20; ++k) alphas.push_back(1.0 + 0.05 * k);
        for (double a : alphas) {
            const int n_theta = a == 2.0 ? 1 : 11;
            for (int t = 0; t < n_theta; ++t) {
                const double th = 0.1 * t;
                // Near alpha = 1 the skewed laws drift far off the table.
                if (a < 1.04 && th > 0.0) continue;
                StandardStableTable table(a, th, 14, 0.05);
                const double q05 = table.quantile(0.05), q25 = table.quantile(0.25);
                const double q50 = table.quantile(0.5), q75 = table.quantile(0.75);
                const double q95 = table.quantile(0.95);
                nodes.push_back({a, th, (q95 - q05) / (q75 - q25), (q95 + q05 - 2.0 * q50) / (q95 - q05), q50,
                                 q75 - q25});
            }
        }
    });
    return nodes;
}

void silence_gsl() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

struct Objective {
    std::span<const double> samples;
    int log2_size;
    double s0, m0;
    bool fit_mu;
    int evals = 0;

    StableParams decode(const double* u) const {
        StableParams p;
        p.alpha = 1.0 + 1.0 / (1.0 + std::exp(-u[0]));
        p.theta = std::tanh(u[1]);
        p.sigma = s0 * std::exp(u[2]);
        p.mu = fit_mu ? m0 + s0 * u[3] : 0.0;
        return p;
    }
};

double negative_loglik_u(const gsl_vector* v, void* ctx) {
    auto* obj = static_cast<Objective*>(ctx);
    ++obj->evals;
    const StableParams p = obj->decode(v->data);
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu)) return 1e300;
    try {
        const double ll = stable_loglik(p, obj->samples, obj->log2_size);
        return std::isfinite(ll) ? -ll : 1e300;
    } catch (const Error&) {
        return 1e300;
    }
}

std::array<double, 4> encode(const StableParams& p, double s0, double m0) {
    const double a = std::clamp(p.alpha, 1.01, 1.99) - 1.0;
    const double th = std::clamp(p.theta, -0.95, 0.95);
    return {std::log(a / (1.0 - a)), std::atanh(th), std::log(p.sigma / s0), (p.mu - m0) / s0};
}

// One Nelder-Mead pass; returns the best vertex and whether the simplex collapsed.
bool nelder_mead(Objective& obj, std::array<double, 4>& u, double& fbest, int max_evals, double tol) {
    const std::size_t dim = obj.fit_mu ? 4 : 3;
    gsl_multimin_function fn{&negative_loglik_u, dim, &obj};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x, i, u[i]);
        gsl_vector_set(step, i, 0.3);
    }
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(m, &fn, x, step);
    bool converged = false;
    while (obj.evals < max_evals) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), tol) == GSL_SUCCESS) {
            converged = true;
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(m);
    for (std::size_t i = 0; i < dim; ++i) u[i] = gsl_vector_get(best, i);
    fbest = gsl_multimin_fminimizer_minimum(m);
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(x);
    gsl_vector_free(step);
    return converged;
}

StableParams standard_errors(const StableParams& p, std::span<const double> samples, int log2_size, bool fit_mu) {
    const std::array<double, 4> h{1e-3, 1e-3 * p.sigma, 1e-3, 1e-3 * p.sigma};
    std::array<bool, 4> active{p.alpha - h[0] > 1.0 && p.alpha + h[0] <= 2.0, true,
                               p.theta - h[2] > -1.0 && p.theta + h[2] < 1.0, fit_mu};
    auto shifted = [&](std::array<double, 4> d) {
        StableParams q = p;
        q.alpha += d[0];
        q.sigma += d[1];
        q.theta += d[2];
        q.mu += d[3];
        return -stable_loglik(q, samples, log2_size);
    };
    std::vector<int> idx;
    for (int i = 0; i < 4; ++i)
        if (active[i]) idx.push_back(i);
    const int n = static_cast<int>(idx.size());
    Eigen::MatrixXd hess(n, n);
    const double f0 = shifted({0, 0, 0, 0});
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            const int i = idx[a], j = idx[b];
            std::array<double, 4> d{0, 0, 0, 0};
            double v;
            if (i == j) {
                d[i] = h[i];
                const double fp = shifted(d);
                d[i] = -h[i];
                const double fm = shifted(d);
                v = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
            } else {
                auto at = [&](double si, double sj) {
                    std::array<double, 4> e{0, 0, 0, 0};
                    e[i] = si * h[i];
                    e[j] = sj * h[j];
                    return shifted(e);
                };
                v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h[i] * h[j]);
            }
            hess(a, b) = hess(b, a) = v;
        }
    }
    StableParams se{nan_v, nan_v, nan_v, nan_v};
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) return se;
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
    std::array<double, 4> out{nan_v, nan_v, nan_v, nan_v};
    for (int a = 0; a < n; ++a) out[idx[a]] = std::sqrt(cov(a, a));
    return {out[0], out[1], out[2], out[3]};
}

}  // namespace

StableParams quantile_initializer(std::span<const double> samples) {
    require(samples.size() >= 5, Errc::insufficient_data, "quantile initializer needs at least 5 samples");
    const auto s = sorted_copy(samples);
    const double x05 = quantile_sorted(s, 0.05), x25 = quantile_sorted(s, 0.25);
    const double x50 = quantile_sorted(s, 0.5), x75 = quantile_sorted(s, 0.75);
    const double x95 = quantile_sorted(s, 0.95);
    require(x75 > x25 && x95 > x05, Errc::degenerate_data, "sample has zero interquartile spread");
    const double nu_a = (x95 - x05) / (x75 - x25);
    const double nu_b = (x95 + x05 - 2.0 * x50) / (x95 - x05);
    const QuantileNode* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    double sign = 1.0;
    for (const auto& node : quantile_lattice()) {
        for (double sg : {1.0, -1.0}) {
            if (sg < 0.0 && node.theta == 0.0) continue;
            const double da = (node.nu_alpha - nu_a) / nu_a;
            const double db = sg * node.nu_beta - nu_b;
            const double d = da * da + db * db;
            if (d < best_d) {
                best_d = d;
                best = &node;
                sign = sg;
            }
        }
    }
    StableParams p;
    p.alpha = best->alpha;
    p.theta = sign * best->theta;
    p.sigma = (x75 - x25) / best->iqr;
    p.mu = x50 - p.sigma * sign * best->median;
    return p;
}

double stable_loglik(const StableParams& p, std::span<const double> samples, int log2_size) {
    p.validate();
    StandardStableTable table(p.alpha, p.theta, log2_size, 0.05);
    const double log_sigma = std::log(p.sigma);
    double ll = 0.0;
    for (double x : samples) ll += table.log_density((x - p.mu) / p.sigma);
    return ll - log_sigma * static_cast<double>(samples.size());
}

StableFit mle_fit(std::span<const double> samples, const FitOptions& options) {
    require(samples.size() >= 100, Errc::insufficient_data, "stable fit needs at least 100 samples");
    for (double x : samples) require(std::isfinite(x), Errc::argument, "stable fit received a non-finite sample");
    silence_gsl();

    StableFit fit;
    StableParams init = options.warm_start ? *options.warm_start : quantile_initializer(samples);
    init.alpha = std::clamp(init.alpha, 1.01, 1.99);
    init.theta = std::clamp(init.theta, -0.95, 0.95);
    if (!options.fit_mu) init.mu = 0.0;
    fit.initial = init;
    fit.initial_loglik = stable_loglik(init, samples, options.log2_table_size);

    Objective obj{samples, options.log2_table_size, init.sigma, init.mu, options.fit_mu};
    auto u = encode(init, obj.s0, obj.m0);
    double fbest = -fit.initial_loglik;
    bool converged = nelder_mead(obj, u, fbest, options.max_evals, options.tolerance);
    if (converged) {
        // Restart from the optimum to escape a prematurely collapsed simplex.
        auto u2 = u;
        double f2 = fbest;
        converged = nelder_mead(obj, u2, f2, obj.evals + options.max_evals / 2, options.tolerance);
        if (f2 <= fbest) {
            u = u2;
            fbest = f2;
        }
    }
    fit.evaluations = obj.evals;
    fit.params = obj.decode(u.data());
    fit.loglik = -fbest;
    if (!(fit.loglik >= fit.initial_loglik)) {
        fit.params = init;
        fit.loglik = fit.initial_loglik;
    }
    fit.converged = converged;
    if (options.standard_errors) {
        fit.standard_error = standard_errors(fit.params, samples, options.log2_table_size, options.fit_mu);
    } else {
        fit.standard_error = {nan_v, nan_v, nan_v, nan_v};
    }
    if (!converged) {
        std::ostringstream os;
        os << "Nelder-Mead did not converge within " << obj.evals << " evaluations";
        throw FitError(os.str(), fit);
    }
    return fit;
}

}  // namespace levylab
