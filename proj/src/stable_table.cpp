#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "levylab/stable.hpp"

namespace levylab {

namespace {

constexpr double pi = std::numbers::pi;

// FFTW planning is not thread-safe; execution on fresh arrays is.
fftw_plan c2r_plan(int n) {
    static std::mutex mu;
    static std::map<int, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mu);
    auto it = plans.find(n);
    if (it != plans.end()) return it->second;
    auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    auto* out = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    fftw_plan plan = fftw_plan_dft_c2r_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans.emplace(n, plan);
    return plan;
}

template <class T>
struct FftwBuffer {
    explicit FftwBuffer(int n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {}
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* data;
};

}  // namespace

StandardStableTable::StandardStableTable(double alpha, double theta, int log2_size, double dz)
    : alpha_(alpha), theta_(alpha == 2.0 ? 0.0 : theta), dz_(dz) {
    StableParams{alpha, 1.0, theta_, 0.0}.validate();
    require(log2_size >= 8 && log2_size <= 22, Errc::argument, "table size out of range");
    require(dz > 0.0, Errc::argument, "table spacing must be positive");
    const int n = 1 << log2_size;
    const double dt = 2.0 * pi / (n * dz);
    z0_ = -0.5 * n * dz;
    half_width_ = 0.5 * n * dz;
    tail_from_ = 0.75 * half_width_;
    if (alpha < 2.0) c_ = tail_constant(alpha);

    const double tpa = (theta_ == 0.0 || alpha == 1.0) ? 0.0 : std::tan(pi * alpha / 2.0);
    // Hermitian half-spectrum: X_k = conj((-1)^k phi(k dt)), so the real
    // backward transform gives sum_k (-1)^k phi(t_k) exp(-2 pi i jk/n).
    FftwBuffer<fftw_complex> in(n / 2 + 1);
    FftwBuffer<double> out(n);
    for (int k = 0; k <= n / 2; ++k) {
        const double ta = std::pow(k * dt, alpha);
        const double phase = theta_ * tpa * ta;
        const double mag = ((k % 2 == 0) ? 1.0 : -1.0) * std::exp(-ta);
        in.data[k][0] = mag * std::cos(phase);
        in.data[k][1] = -mag * std::sin(phase);
    }
    fftw_execute_dft_c2r(c2r_plan(n), in.data, out.data);

    f_.resize(n);
    const double scale = dt / (2.0 * pi);
    const double period = n * dz;
    // Periodic images of the power tails, smooth over the table, so sampled
    // sparsely and interpolated.
    constexpr int stride = 64;
    auto images = [&](double z) {
        double a = 0.0;
        for (int m = 1; m <= 2; ++m) a += tail_density(z + m * period) + tail_density(z - m * period);
        return a;
    };
    std::vector<double> alias(n / stride + 1, 0.0);
    if (alpha < 2.0)
        for (std::size_t i = 0; i < alias.size(); ++i) alias[i] = images(z0_ + static_cast<double>(i) * stride * dz);
    for (int j = 0; j < n; ++j) {
        const int i = j / stride;
        const double s = static_cast<double>(j % stride) / stride;
        f_[j] = scale * out.data[j] - ((1.0 - s) * alias[i] + s * alias[i + 1]);
    }

    // Cumulative distribution over the table plus analytic tail masses.
    cdf_.resize(n);
    const double c = c_;
    const double left_mass = 0.5 * (1.0 - theta_) * c * std::pow(tail_from_, -alpha);
    const int j_lo = static_cast<int>(std::ceil((-tail_from_ - z0_) / dz));
    double acc = left_mass;
    for (int j = 0; j < n; ++j) {
        if (j <= j_lo) {
            cdf_[j] = left_mass;
            continue;
        }
        acc += 0.5 * dz * (std::max(f_[j - 1], 0.0) + std::max(f_[j], 0.0));
        cdf_[j] = acc;
    }
}

double StandardStableTable::tail_density(double z) const {
    if (alpha_ >= 2.0) return 0.0;
    const double w = z > 0 ? 0.5 * (1.0 + theta_) : 0.5 * (1.0 - theta_);
    return w * alpha_ * c_ * std::pow(std::abs(z), -1.0 - alpha_);
}

double StandardStableTable::density(double z) const {
    if (std::abs(z) >= tail_from_) return tail_density(z);
    const double u = (z - z0_) / dz_;
    const int j = static_cast<int>(std::floor(u));
    const double s = u - j;
    const double f0 = f_[j - 1], f1 = f_[j], f2 = f_[j + 1], f3 = f_[j + 2];
    // Four-point Lagrange cubic on nodes j-1..j+2.
    const double sm = s - 1.0, s2 = s - 2.0, sp = s + 1.0;
    return -s * sm * s2 / 6.0 * f0 + sp * sm * s2 / 2.0 * f1 - sp * s * s2 / 2.0 * f2 + sp * s * sm / 6.0 * f3;
}

double StandardStableTable::log_density(double z) const {
    return std::log(std::max(density(z), 1e-300));
}

double StandardStableTable::cdf(double z) const {
    const double c = c_;
    if (z <= -tail_from_) return 0.5 * (1.0 - theta_) * c * std::pow(-z, -alpha_);
    if (z >= tail_from_) return 1.0 - 0.5 * (1.0 + theta_) * c * std::pow(z, -alpha_);
    const double u = (z - z0_) / dz_;
    const int j = static_cast<int>(std::floor(u));
    const double s = u - j;
    return cdf_[j] + s * (cdf_[j + 1] - cdf_[j]);
}

double StandardStableTable::quantile(double p) const {
    require(p > 0.0 && p < 1.0, Errc::argument, "quantile level must lie in (0, 1)");
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), p);
    if (it == cdf_.begin() || it == cdf_.end()) {
        // Invert the power tails.
        const double c = c_;
        if (it == cdf_.begin()) return -std::pow(p / (0.5 * (1.0 - theta_) * c), -1.0 / alpha_);
        return std::pow((1.0 - p) / (0.5 * (1.0 + theta_) * c), -1.0 / alpha_);
    }
    const auto j = static_cast<std::size_t>(it - cdf_.begin());
    const double c0 = cdf_[j - 1], c1 = cdf_[j];
    const double s = c1 > c0 ? (p - c0) / (c1 - c0) : 0.0;
    return z0_ + (static_cast<double>(j - 1) + s) * dz_;
}

}  // namespace levylab
