#ifndef LEVYLAB_FRACDRIFT_HPP
#define LEVYLAB_FRACDRIFT_HPP

#include <functional>
#include <memory>
#include <vector>

#include "levylab/error.hpp"
#include "levylab/potentials.hpp"

namespace levylab {

using ScalarFn = std::function<double(double)>;

struct DriftApproxParams {
    double h = 0.05;
    int K = 200;
    int p = 0;
    int q = 0;
    // The mesh equals h0(alpha), where c_gamma h^{-gamma} is exactly 1.
    bool at_h0 = false;

    void validate() const;
    // K = 0 at h = h0: the drift collapses to -f'.
    static DriftApproxParams gradient_reduction(double alpha);
};

// Coefficients of (1 - z)^gamma, shared read-only across callers.
class GLCoefficients {
public:
    GLCoefficients(double gamma, std::shared_ptr<const std::vector<double>> table, int K)
        : gamma_(gamma), table_(std::move(table)), K_(K) {}
    double gamma() const noexcept { return gamma_; }
    int K() const noexcept { return K_; }
    double operator[](int k) const noexcept { return (*table_)[static_cast<std::size_t>(k)]; }

private:
    double gamma_;
    std::shared_ptr<const std::vector<double>> table_;
    int K_;
};

GLCoefficients gl_coeffs(double gamma, int K);

// c_gamma = 1 / (2 cos(gamma pi / 2)).
double gl_constant(double gamma);

double shifted_gl_left(const ScalarFn& f, double w, double gamma, double h, int p, int K);
double shifted_gl_right(const ScalarFn& f, double w, double gamma, double h, int q, int K);
double riesz_feller_approx(const ScalarFn& f, double w, double gamma, double theta, const DriftApproxParams& approx);

struct FractionalIntegrals {
    double plus;   // (1/Gamma(-gamma)) int_0^inf f(w + xi) xi^{-gamma-1} dxi
    double minus;  // same with f(w - xi)
    double error;  // summed quadrature error estimate
};

FractionalIntegrals fractional_integrals(const ScalarFn& f, double w, double gamma);
double riesz_feller_exact(const ScalarFn& f, double w, double gamma, double theta);

// [2 cos((alpha - 2) pi / 2)]^{1/(2 - alpha)}.
double h0(double alpha, double epsilon);

class DriftOverflow : public Error {
public:
    DriftOverflow(const std::string& message, double stencil_point)
        : Error(Errc::drift_overflow, message), point_(stencil_point) {}
    double stencil_point() const noexcept { return point_; }

private:
    double point_;
};

// Drift value mantissa * exp(log_scale).
struct LogDrift {
    double mantissa = 0.0;
    double log_scale = 0.0;
    double max_exponent = 0.0;
    double argmax_point = 0.0;

    double value() const noexcept;
    double log_abs() const noexcept;
};

// Weighted stencil of the fractional Langevin drift for fixed (alpha, theta, approx).
class DriftStencil {
public:
    DriftStencil(double alpha, double theta, const DriftApproxParams& approx);

    LogDrift evaluate(const Potential& f, double epsilon, double w) const;
    double prefactor() const noexcept { return prefactor_; }
    std::size_t size() const noexcept { return offsets_.size(); }

private:
    double alpha_;
    std::vector<double> offsets_;
    std::vector<double> weights_;
    double prefactor_;
};

// Fractional Langevin drift b_{h,K}(w) in log-domain ratio form.
double drift_b(double w, const Potential& f, double epsilon, double alpha, double theta,
               const DriftApproxParams& approx);

struct ConvergenceRow {
    double h;
    int K;
    double approx;
    double error;
};

struct ConvergenceTable {
    double gamma, theta, w, exact;
    std::vector<ConvergenceRow> rows;
    double slope;  // least-squares log-log slope of error against h
};

ConvergenceTable convergence_study(const ScalarFn& f, double gamma, double theta, const std::vector<double>& h_list,
                                   int K, int p = 0, int q = 0, double w = 0.0);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace levylab

#endif
