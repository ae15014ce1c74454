#include "levylab/fracdrift.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace levylab {

namespace {

constexpr double pi = std::numbers::pi;

void check_gamma(double gamma) {
    if (!(gamma > -1.0 && gamma < 0.0)) {
        std::ostringstream os;
        os << "fractional order gamma=" << gamma << " must lie in (-1, 0)";
        fail(Errc::parameter_domain, os.str());
    }
}

void check_drift_alpha(double alpha) {
    if (!(alpha > 1.0 + 1e-3 && alpha < 2.0)) {
        std::ostringstream os;
        os << "fractional drift needs alpha in (1.001, 2), got " << alpha;
        fail(Errc::parameter_domain, os.str());
    }
}

}  // namespace

void DriftApproxParams::validate() const {
    require(h > 0.0 && std::isfinite(h), Errc::parameter_domain, "mesh width h must be positive");
    require(K >= 0 && p >= 0 && q >= 0, Errc::parameter_domain, "K, p and q must be nonnegative");
}

DriftApproxParams DriftApproxParams::gradient_reduction(double alpha) {
    return DriftApproxParams{h0(alpha, 1.0), 0, 0, 0, true};
}

GLCoefficients gl_coeffs(double gamma, int K) {
    check_gamma(gamma);
    require(K >= 0, Errc::argument, "K must be nonnegative");
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[gamma];
    if (!slot || static_cast<int>(slot->size()) <= K) {
        auto table = std::make_shared<std::vector<double>>();
        table->reserve(static_cast<std::size_t>(K) + 1);
        table->push_back(1.0);
        for (int k = 1; k <= K; ++k) table->push_back(table->back() * (k - 1 - gamma) / k);
        slot = std::move(table);
    }
    return GLCoefficients(gamma, slot, K);
}

double gl_constant(double gamma) {
    check_gamma(gamma);
    return 1.0 / (2.0 * std::cos(gamma * pi / 2.0));
}

double shifted_gl_left(const ScalarFn& f, double w, double gamma, double h, int p, int K) {
    require(h > 0.0, Errc::parameter_domain, "mesh width h must be positive");
    const auto g = gl_coeffs(gamma, K);
    double s = 0.0;
    for (int k = 0; k <= K; ++k) s += g[k] * f(w - (k - p) * h);
    return s * std::pow(h, -gamma);
}

double shifted_gl_right(const ScalarFn& f, double w, double gamma, double h, int q, int K) {
    require(h > 0.0, Errc::parameter_domain, "mesh width h must be positive");
    const auto g = gl_coeffs(gamma, K);
    double s = 0.0;
    for (int k = 0; k <= K; ++k) s += g[k] * f(w + (k - q) * h);
    return s * std::pow(h, -gamma);
}

double riesz_feller_approx(const ScalarFn& f, double w, double gamma, double theta, const DriftApproxParams& approx) {
    approx.validate();
    require(theta > -1.0 && theta < 1.0, Errc::parameter_domain, "theta must lie in (-1, 1)");
    const double a = shifted_gl_left(f, w, gamma, approx.h, approx.p, approx.K);
    const double b = shifted_gl_right(f, w, gamma, approx.h, approx.q, approx.K);
    return gl_constant(gamma) * ((1.0 + theta) * a + (1.0 - theta) * b);
}

FractionalIntegrals fractional_integrals(const ScalarFn& f, double w, double gamma) {
    check_gamma(gamma);
    const double expo = -gamma - 1.0;
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    const double tol = 1e-12;
    auto side = [&](double sign, double& err) {
        double e1 = 0.0, e2 = 0.0, l1 = 0.0;
        auto kernel = [&](double xi) { return xi > 0.0 ? f(w + sign * xi) * std::pow(xi, expo) : 0.0; };
        const double a = near.integrate(kernel, 0.0, 1.0, tol, &e1, &l1);
        const double b = far.integrate(kernel, 1.0, std::numeric_limits<double>::infinity(), tol, &e2, &l1);
        err += e1 + e2;
        return a + b;
    };
    FractionalIntegrals out{0.0, 0.0, 0.0};
    const double g = std::tgamma(-gamma);
    out.plus = side(1.0, out.error) / g;
    out.minus = side(-1.0, out.error) / g;
    out.error /= g;
    if (!std::isfinite(out.plus) || !std::isfinite(out.minus) || out.error > 1e-7) {
        std::ostringstream os;
        os << "fractional integral quadrature reached only error " << out.error;
        fail(Errc::numerical, os.str());
    }
    return out;
}

double riesz_feller_exact(const ScalarFn& f, double w, double gamma, double theta) {
    require(theta >= -1.0 && theta <= 1.0, Errc::parameter_domain, "theta must lie in [-1, 1]");
    const auto i = fractional_integrals(f, w, gamma);
    return gl_constant(gamma) * ((1.0 - theta) * i.plus + (1.0 + theta) * i.minus);
}

double h0(double alpha, double epsilon) {
    check_drift_alpha(alpha);
    require(epsilon > 0.0, Errc::parameter_domain, "epsilon must be positive");
    return std::pow(2.0 * std::cos((alpha - 2.0) * pi / 2.0), 1.0 / (2.0 - alpha));
}

double LogDrift::value() const noexcept { return mantissa * std::exp(log_scale); }

double LogDrift::log_abs() const noexcept { return std::log(std::abs(mantissa)) + log_scale; }

DriftStencil::DriftStencil(double alpha, double theta, const DriftApproxParams& approx) : alpha_(alpha) {
    check_drift_alpha(alpha);
    require(theta > -1.0 && theta < 1.0, Errc::parameter_domain, "theta must lie in (-1, 1)");
    approx.validate();
    const double gamma = alpha - 2.0;
    const auto g = gl_coeffs(gamma, approx.K);
    const double h = approx.h;
    // At h0 the central weight 2 g_0 times the prefactor is exactly one.
    prefactor_ = approx.at_h0 ? 0.5 : gl_constant(gamma) * std::pow(h, -gamma);
    if (approx.p == 0 && approx.q == 0) {
        offsets_.push_back(0.0);
        weights_.push_back(2.0 * g[0]);
    } else {
        offsets_.push_back(approx.p * h);
        weights_.push_back((1.0 + theta) * g[0]);
        offsets_.push_back(-approx.q * h);
        weights_.push_back((1.0 - theta) * g[0]);
    }
    for (int k = 1; k <= approx.K; ++k) {
        offsets_.push_back(-(k - approx.p) * h);
        weights_.push_back((1.0 + theta) * g[k]);
        offsets_.push_back((k - approx.q) * h);
        weights_.push_back((1.0 - theta) * g[k]);
    }
}

LogDrift DriftStencil::evaluate(const Potential& f, double epsilon, double w) const {
    const double inv = std::pow(epsilon, -alpha_);
    const double fw = f.value(w);
    thread_local std::vector<double> expo;
    expo.resize(offsets_.size());
    LogDrift out;
    out.max_exponent = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const double x = w + offsets_[k];
        expo[k] = -inv * (f.value(x) - fw);
        if (expo[k] > out.max_exponent) {
            out.max_exponent = expo[k];
            out.argmax_point = x;
        }
    }
    double s = 0.0;
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
        const double x = w + offsets_[k];
        s += weights_[k] * -f.gradient(x) * std::exp(expo[k] - out.max_exponent);
    }
    out.mantissa = prefactor_ * s;
    out.log_scale = out.max_exponent;
    return out;
}

double drift_b(double w, const Potential& f, double epsilon, double alpha, double theta,
               const DriftApproxParams& approx) {
    require(epsilon > 0.0 && std::isfinite(epsilon), Errc::parameter_domain, "epsilon must be positive");
    const DriftStencil stencil(alpha, theta, approx);
    const LogDrift d = stencil.evaluate(f, epsilon, w);
    if (d.max_exponent > 700.0) {
        std::ostringstream os;
        os << "drift exponent " << d.max_exponent << " exceeds 700 at stencil point " << d.argmax_point
           << " (w=" << w << ")";
        throw DriftOverflow(os.str(), d.argmax_point);
    }
    const double v = d.value();
    require(std::isfinite(v), Errc::numerical, "drift evaluation is not finite");
    return v;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, Errc::argument, "slope fit needs two or more matched points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, Errc::argument, "log-log fit needs positive values");
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

ConvergenceTable convergence_study(const ScalarFn& f, double gamma, double theta, const std::vector<double>& h_list,
                                   int K, int p, int q, double w) {
    require(!h_list.empty(), Errc::argument, "convergence study needs at least one mesh width");
    ConvergenceTable t{gamma, theta, w, riesz_feller_exact(f, w, gamma, theta), {}, 0.0};
    std::vector<double> hs, errs;
    for (double h : h_list) {
        const double a = riesz_feller_approx(f, w, gamma, theta, DriftApproxParams{h, K, p, q, false});
        t.rows.push_back({h, K, a, std::abs(a - t.exact)});
        hs.push_back(h);
        errs.push_back(std::abs(a - t.exact));
    }
    t.slope = hs.size() >= 2 ? loglog_slope(hs, errs) : std::numeric_limits<double>::quiet_NaN();
    return t;
}

}  // namespace levylab
