#ifndef LEVYLAB_STABLE_HPP
#define LEVYLAB_STABLE_HPP

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "levylab/error.hpp"
#include "levylab/rng.hpp"

namespace levylab {

// S_alpha(sigma, theta, mu) in the 1-parametrization.
struct StableParams {
    double alpha = 2.0;
    double sigma = 1.0;
    double theta = 0.0;
    double mu = 0.0;

    // Throws parameter_domain or unsupported_parametrization.
    void validate() const;
};

std::complex<double> char_fn(const StableParams& p, double t);

// One draw of S_alpha(1, theta, 0) by the Chambers-Mallows-Stuck transform.
double sample_standard(double alpha, double theta, Rng& rng);
double sample_one(const StableParams& p, Rng& rng);
std::vector<double> sample(const StableParams& p, Rng& rng, std::size_t n);
std::vector<double> sample(const StableParams& p, const RngStream& stream, std::size_t n);

// dt^{1/alpha} times a standard draw; alpha in (1, 2].
double levy_increment(double alpha, double theta, double dt, Rng& rng);
double levy_increment(double alpha, double theta, double dt, const RngStream& stream);

// Density by quadrature of the inverse Fourier integral.
double pdf(const StableParams& p, double x);

// Tail constant C_alpha = (1 - alpha) / (Gamma(2 - alpha) cos(pi alpha / 2)).
double tail_constant(double alpha);

// Density of S_alpha(1, theta, 0) tabulated by FFT, cubic-interpolated, with
// power-law tails outside the table.
class StandardStableTable {
public:
    StandardStableTable(double alpha, double theta, int log2_size = 13, double dz = 0.05);

    double density(double z) const;
    double log_density(double z) const;
    double cdf(double z) const;
    double quantile(double p) const;

    double alpha() const noexcept { return alpha_; }
    double theta() const noexcept { return theta_; }
    double half_width() const noexcept { return half_width_; }

private:
    double tail_density(double z) const;

    double alpha_, theta_, dz_, z0_, half_width_, tail_from_, c_ = 0.0;
    std::vector<double> f_;
    std::vector<double> cdf_;
};

struct FitOptions {
    bool fit_mu = true;
    bool standard_errors = true;
    int max_evals = 1500;
    double tolerance = 1e-4;
    int log2_table_size = 13;
    // Optional starting point replacing the quantile initializer.
    const StableParams* warm_start = nullptr;
};

struct StableFit {
    StableParams params;
    StableParams standard_error;  // NaN where the Hessian is not invertible
    StableParams initial;
    double loglik = 0.0;
    double initial_loglik = 0.0;
    bool converged = false;
    int evaluations = 0;
};

class FitError : public Error {
public:
    FitError(const std::string& message, StableFit best)
        : Error(Errc::fit, message), best_(best) {}
    const StableFit& best() const noexcept { return best_; }

private:
    StableFit best_;
};

// Quantile-based starting point.
StableParams quantile_initializer(std::span<const double> samples);

double stable_loglik(const StableParams& p, std::span<const double> samples, int log2_table_size = 13);

// Maximum likelihood over alpha in (1, 2), theta in (-1, 1), sigma > 0, mu.
StableFit mle_fit(std::span<const double> samples, const FitOptions& options = {});

}  // namespace levylab

#endif
