#include "levylab/gni.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "levylab/error.hpp"

namespace levylab {

namespace {

using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using WeightMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<const Eigen::VectorXd>;
using MatMap = Eigen::Map<const Mat>;

}  // namespace

const char* activation_name(Activation a) noexcept {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::elu: return "elu";
        default: return "linear";
    }
}

const char* loss_name(LossKind l) noexcept { return l == LossKind::mse ? "mse" : "cross_entropy"; }

const char* noise_mode_name(NoiseMode m) noexcept { return m == NoiseMode::additive ? "additive" : "multiplicative"; }

const char* noise_model_name(NoiseModelKind k) noexcept {
    switch (k) {
        case NoiseModelKind::gaussian: return "gaussian";
        case NoiseModelKind::stable: return "stable";
        default: return "none";
    }
}

void NetworkSpec::validate() const {
    require(widths.size() >= 3, Errc::shape, "network needs at least two layers");
    for (auto w : widths) require(w >= 1, Errc::shape, "layer widths must be at least 1");
}

bool NoiseSpec::is_zero() const noexcept {
    return std::all_of(variances.begin(), variances.end(), [](double v) { return v == 0.0; });
}

void NoiseSpec::validate(const NetworkSpec& net) const {
    if (variances.size() != net.layers()) {
        std::ostringstream os;
        os << "noise needs one variance per non-output layer (" << net.layers() << "), got " << variances.size();
        fail(Errc::shape, os.str());
    }
    for (double v : variances)
        require(v >= 0.0 && std::isfinite(v), Errc::parameter_domain, "noise variances must be nonnegative");
}

NoiseSpec NoiseSpec::uniform(NoiseMode mode, std::size_t layers, double variance) {
    return NoiseSpec{mode, std::vector<double>(layers, variance)};
}

Dataset sinusoid_dataset(std::size_t n_points, const std::vector<double>& q_list, Rng& rng) {
    require(!q_list.empty(), Errc::argument, "sinusoid task needs at least one frequency");
    require(n_points >= 1, Errc::argument, "sinusoid task needs at least one point");
    Dataset d;
    d.n = n_points;
    d.in_dim = d.out_dim = 1;
    d.x.resize(n_points);
    d.y.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double x = 2.0 * rng.uniform() - 1.0;
        double y = 0.0;
        for (double q : q_list) y += std::sin(2.0 * std::numbers::pi * q * x);
        d.x[i] = x;
        d.y[i] = y;
    }
    std::ostringstream os;
    os << "sinusoid(n=" << n_points << ",q=";
    for (std::size_t i = 0; i < q_list.size(); ++i) os << (i ? ";" : "") << q_list[i];
    os << ",seed=" << rng.stream().seed << ":" << rng.stream().id << ")";
    d.id = os.str();
    return d;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto& w = spec_.widths;
    std::size_t off = 0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        w_off_.push_back(off);
        off += w[i] * w[i - 1];
        b_off_.push_back(off);
        off += w[i];
    }
    params_.assign(off, 0.0);
    Rng rng(spec_.init);
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double k = 1.0 / std::sqrt(static_cast<double>(w[i - 1]));
        for (std::size_t j = 0; j < w[i] * w[i - 1]; ++j) params_[w_off_[i - 1] + j] = k * (2.0 * rng.uniform() - 1.0);
        for (std::size_t j = 0; j < w[i]; ++j)
            params_[b_off_[i - 1] + j] = spec_.bias ? k * (2.0 * rng.uniform() - 1.0) : 0.0;
    }
}

std::size_t Network::weight_index(std::size_t i, std::size_t in, std::size_t out) const noexcept {
    return w_off_[i - 1] + out * spec_.widths[i - 1] + in;
}

std::size_t Network::weight_count() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < spec_.widths.size(); ++i) n += spec_.widths[i] * spec_.widths[i - 1];
    return n;
}

NoiseDraw draw_noise(const Network& net, const NoiseSpec& noise, std::size_t n_examples, Rng& rng) {
    noise.validate(net.spec());
    NoiseDraw d;
    d.mode = noise.mode;
    const double base = noise.mode == NoiseMode::additive ? 0.0 : 1.0;
    for (std::size_t i = 0; i < net.layers(); ++i) {
        std::vector<double> e(net.spec().widths[i] * n_examples, base);
        const double sd = std::sqrt(noise.variances[i]);
        if (sd > 0.0)
            for (auto& v : e) v = base + sd * rng.normal();
        d.eps.push_back(std::move(e));
    }
    return d;
}

namespace {

WeightMap weights(const Network& net, std::size_t i) {
    const auto& w = net.spec().widths;
    return WeightMap(net.parameters().data() + net.weight_offset(i), static_cast<Eigen::Index>(w[i]),
                     static_cast<Eigen::Index>(w[i - 1]));
}

VecMap biases(const Network& net, std::size_t i) {
    return VecMap(net.parameters().data() + net.bias_offset(i), static_cast<Eigen::Index>(net.spec().widths[i]));
}

void activate(Activation a, Mat& z) {
    switch (a) {
        case Activation::relu: z = z.cwiseMax(0.0); break;
        case Activation::elu: z = z.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); }); break;
        default: break;
    }
}

Mat activation_slope(Activation a, const Mat& z) {
    switch (a) {
        case Activation::relu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::elu: return z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
        default: return Mat::Ones(z.rows(), z.cols());
    }
}

void inject(const NoiseDraw* draw, std::size_t layer, Mat& h) {
    if (!draw) return;
    const auto& e = draw->eps[layer];
    require(e.size() == static_cast<std::size_t>(h.size()), Errc::shape, "noise draw does not match the batch");
    const MatMap eps(e.data(), h.rows(), h.cols());
    if (draw->mode == NoiseMode::additive) h += eps;
    else h = h.cwiseProduct(eps);
}

// Noised forward pass; returns h~_0 .. h~_{L-1} and pre-activations z_1 .. z_L.
void forward(const Network& net, const NoiseDraw* draw, const Mat& x, std::vector<Mat>& h,
             std::vector<Mat>& z) {
    const std::size_t L = net.layers();
    h.assign(L, Mat());
    z.assign(L + 1, Mat());
    h[0] = x;
    inject(draw, 0, h[0]);
    for (std::size_t i = 1; i <= L; ++i) {
        z[i] = weights(net, i) * h[i - 1];
        z[i].colwise() += biases(net, i);
        if (i < L) {
            h[i] = z[i];
            activate(net.spec().activation, h[i]);
            inject(draw, i, h[i]);
        }
    }
}

double evaluate(const Network& net, const NoiseDraw* draw, const Dataset& data, std::vector<double>* grad) {
    const auto& spec = net.spec();
    require(data.n >= 1, Errc::argument, "batch must be nonempty");
    require(data.in_dim == spec.widths.front() && data.out_dim == spec.widths.back(), Errc::shape,
            "dataset dimensions do not match the network");
    const auto N = static_cast<Eigen::Index>(data.n);
    const Mat x = MatMap(data.x.data(), static_cast<Eigen::Index>(data.in_dim), N);
    const MatMap y(data.y.data(), static_cast<Eigen::Index>(data.out_dim), N);
    std::vector<Mat> h, z;
    forward(net, draw, x, h, z);
    const std::size_t L = net.layers();
    const Mat& out = z[L];
    double loss;
    Mat d;
    if (spec.loss == LossKind::mse) {
        const Mat r = out - y;
        const double denom = static_cast<double>(out.size());
        loss = r.squaredNorm() / denom;
        if (grad) d = (2.0 / denom) * r;
    } else {
        const Eigen::RowVectorXd mx = out.colwise().maxCoeff();
        Mat shifted = out.rowwise() - mx;
        const Eigen::RowVectorXd lse = shifted.array().exp().colwise().sum().log().matrix();
        const Mat logp = shifted.rowwise() - lse;
        loss = -(y.cwiseProduct(logp)).sum() / static_cast<double>(N);
        if (grad) {
            const Eigen::RowVectorXd mass = y.colwise().sum();
            d = (logp.array().exp().rowwise() * mass.array()).matrix() - y;
            d /= static_cast<double>(N);
        }
    }
    if (!std::isfinite(loss)) fail(Errc::numerical, "loss is not finite");
    if (!grad) return loss;
    grad->assign(net.parameter_count(), 0.0);
    for (std::size_t i = L; i >= 1; --i) {
        const auto& w = spec.widths;
        Eigen::Map<RowMat> gw(grad->data() + net.weight_offset(i), static_cast<Eigen::Index>(w[i]),
                              static_cast<Eigen::Index>(w[i - 1]));
        gw = d * h[i - 1].transpose();
        if (spec.bias) {
            Eigen::Map<Eigen::VectorXd> gb(grad->data() + net.bias_offset(i), static_cast<Eigen::Index>(w[i]));
            gb = d.rowwise().sum();
        }
        if (i == 1) break;
        Mat g = weights(net, i).transpose() * d;
        if (draw && draw->mode == NoiseMode::multiplicative)
            g = g.cwiseProduct(MatMap(draw->eps[i - 1].data(), g.rows(), g.cols()));
        d = g.cwiseProduct(activation_slope(spec.activation, z[i - 1]));
    }
    return loss;
}

}  // namespace

ForwardTrace forward_noised(const Network& net, const NoiseDraw& draw, std::span<const double> x) {
    const auto& w = net.spec().widths;
    if (x.size() != w.front()) {
        std::ostringstream os;
        os << "input has dimension " << x.size() << ", network expects " << w.front();
        fail(Errc::shape, os.str());
    }
    const Mat in = MatMap(x.data(), static_cast<Eigen::Index>(x.size()), 1);
    ForwardTrace t;
    auto run = [&](const NoiseDraw* d, std::vector<std::vector<double>>& dst) {
        std::vector<Mat> h, z;
        forward(net, d, in, h, z);
        for (const auto& m : h) dst.emplace_back(m.data(), m.data() + m.size());
        dst.emplace_back(z.back().data(), z.back().data() + z.back().size());
    };
    run(&draw, t.noised);
    run(nullptr, t.clean);
    for (std::size_t i = 0; i < t.noised.size(); ++i) {
        std::vector<double> e(t.noised[i].size());
        for (std::size_t j = 0; j < e.size(); ++j) e[j] = t.noised[i][j] - t.clean[i][j];
        t.accumulated.push_back(std::move(e));
    }
    return t;
}

ForwardTrace forward_noised(const Network& net, const NoiseSpec& noise, std::span<const double> x, Rng& rng) {
    return forward_noised(net, draw_noise(net, noise, 1, rng), x);
}

LossGrad loss_and_grad(const Network& net, const Dataset& data, const NoiseDraw* draw) {
    LossGrad out;
    out.loss = evaluate(net, draw, data, &out.grad);
    return out;
}

double clean_loss(const Network& net, const Dataset& data) {
    return evaluate(net, nullptr, data, nullptr);
}

namespace {

LossGrad noised_loss_and_grad(const Network& net, const NoiseSpec& noise, const Dataset& data, Rng& rng) {
    const NoiseDraw draw = draw_noise(net, noise, data.n, rng);
    LossGrad out;
    out.loss = evaluate(net, &draw, data, &out.grad);
    return out;
}

}  // namespace

LossGrad marginalized_loss_and_grad(const Network& net, const NoiseSpec& noise, const Dataset& data, std::size_t M,
                                    Rng& rng) {
    require(M >= 1, Errc::argument, "marginalization needs M >= 1");
    noise.validate(net.spec());
    if (noise.is_zero()) return loss_and_grad(net, data, nullptr);
    LossGrad acc{0.0, std::vector<double>(net.parameter_count(), 0.0)};
    for (std::size_t m = 0; m < M; ++m) {
        const LossGrad g = noised_loss_and_grad(net, noise, data, rng);
        acc.loss += g.loss;
        for (std::size_t j = 0; j < g.grad.size(); ++j) acc.grad[j] += g.grad[j];
    }
    const double inv = 1.0 / static_cast<double>(M);
    acc.loss *= inv;
    for (auto& v : acc.grad) v *= inv;
    return acc;
}

double GradientNoiseSample::at(std::size_t draw, std::size_t layer, std::size_t in, std::size_t out) const {
    require(draw < draws && layer >= 1 && layer < widths.size(), Errc::argument, "gradient noise index out of range");
    require(in < widths[layer - 1] && out < widths[layer], Errc::argument, "gradient noise index out of range");
    return values[draw * weights + layer_offsets[layer - 1] + out * widths[layer - 1] + in];
}

std::vector<double> GradientNoiseSample::layer_values(std::size_t layer) const {
    require(layer >= 1 && layer < widths.size(), Errc::argument, "layer index out of range");
    std::vector<double> v;
    for (std::size_t d = 0; d < draws; ++d)
        v.insert(v.end(), values.begin() + static_cast<std::ptrdiff_t>(d * weights + layer_offsets[layer - 1]),
                 values.begin() + static_cast<std::ptrdiff_t>(d * weights + layer_offsets[layer]));
    return v;
}

namespace {

GradientNoiseSample empty_sample(const Network& net, const Dataset& data, std::size_t M, const Rng& rng) {
    GradientNoiseSample s;
    s.widths = net.spec().widths;
    s.weights = net.weight_count();
    s.layer_offsets.push_back(0);
    for (std::size_t i = 1; i < s.widths.size(); ++i)
        s.layer_offsets.push_back(s.layer_offsets.back() + s.widths[i] * s.widths[i - 1]);
    s.M = M;
    s.dataset_id = data.id;
    s.seed = rng.stream();
    return s;
}

void append_difference(const Network& net, GradientNoiseSample& s, const std::vector<double>& fresh,
                       const std::vector<double>& ref) {
    for (std::size_t i = 1; i <= net.layers(); ++i) {
        const std::size_t off = net.weight_offset(i);
        const std::size_t cnt = s.layer_offsets[i] - s.layer_offsets[i - 1];
        for (std::size_t j = 0; j < cnt; ++j) s.values.push_back(fresh[off + j] - ref[off + j]);
    }
    ++s.draws;
}

}  // namespace

GradientNoiseSample implicit_gradient_noise(const Network& net, const NoiseSpec& noise, const Dataset& data,
                                            std::size_t M, Rng& rng) {
    require(M >= 2, Errc::argument, "implicit gradient noise needs M >= 2");
    GradientNoiseSample s = empty_sample(net, data, M, rng);
    if (noise.is_zero()) {
        noise.validate(net.spec());
        s.values.assign(s.weights, 0.0);
        s.draws = 1;
        return s;
    }
    const LossGrad ref = marginalized_loss_and_grad(net, noise, data, M, rng);
    const LossGrad fresh = noised_loss_and_grad(net, noise, data, rng);
    append_difference(net, s, fresh.grad, ref.grad);
    return s;
}

GradientNoiseSample implicit_gradient_noise_batch(const Network& net, const NoiseSpec& noise, const Dataset& data,
                                                  std::size_t M, std::size_t draws, Rng& rng) {
    require(M >= 2, Errc::argument, "implicit gradient noise needs M >= 2");
    require(draws >= 1, Errc::argument, "need at least one draw");
    GradientNoiseSample s = empty_sample(net, data, M, rng);
    if (noise.is_zero()) {
        noise.validate(net.spec());
        s.values.assign(s.weights * draws, 0.0);
        s.draws = draws;
        return s;
    }
    const LossGrad ref = marginalized_loss_and_grad(net, noise, data, M, rng);
    s.values.reserve(s.weights * draws);
    for (std::size_t d = 0; d < draws; ++d) {
        const LossGrad fresh = noised_loss_and_grad(net, noise, data, rng);
        append_difference(net, s, fresh.grad, ref.grad);
    }
    return s;
}

MomentProfile moment_profile(std::span<const double> samples, int m_max) {
    require(samples.size() >= 10000, Errc::insufficient_data, "moment profile needs at least 10^4 samples");
    require(m_max >= 3 && m_max <= 10, Errc::argument, "m_max must lie in [3, 10]");
    double top = 0.0;
    for (double x : samples) top = std::max(top, std::abs(x));
    require(top > 0.0 && std::isfinite(top), Errc::degenerate_data, "samples are all zero or not finite");
    MomentProfile p;
    const double n = static_cast<double>(samples.size());
    for (int m = 1; m <= m_max; ++m) {
        double s = 0.0;
        for (double x : samples) s += std::pow(std::abs(x) / top, m);
        p.orders.push_back(m);
        p.norms.push_back(top * std::pow(s / n, 1.0 / m));
    }
    std::vector<double> lm, ly;
    for (std::size_t i = 1; i < p.orders.size(); ++i) {
        lm.push_back(static_cast<double>(p.orders[i]));
        ly.push_back(std::log(p.norms[i]));
    }
    // log ||X||_m regressed on log Gamma(m + 1) / m, which is exact for Exp(1) and tends to log m - 1.
    const double k = static_cast<double>(lm.size());
    double gx = 0.0, gy = 0.0;
    std::vector<double> gm(lm.size());
    for (std::size_t i = 0; i < lm.size(); ++i) {
        gm[i] = std::lgamma(lm[i] + 1.0) / lm[i];
        gx += gm[i] / k;
        gy += ly[i] / k;
    }
    double gxy = 0.0, gxx = 0.0;
    for (std::size_t i = 0; i < lm.size(); ++i) {
        gxy += (gm[i] - gx) * (ly[i] - gy);
        gxx += (gm[i] - gx) * (gm[i] - gx);
    }
    const double r = std::max(0.0, gxy / gxx);
    p.log_c = gy - r * gx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lm.size(); ++i) rss += std::pow(ly[i] - p.log_c - r * gm[i], 2);
    p.r_hat = r;
    p.residual = std::sqrt(rss / k);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lm.size(); ++i) {
        mx += std::log(lm[i]) / static_cast<double>(lm.size());
        my += ly[i] / static_cast<double>(lm.size());
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lm.size(); ++i) {
        sxy += (std::log(lm[i]) - mx) * (ly[i] - my);
        sxx += (std::log(lm[i]) - mx) * (std::log(lm[i]) - mx);
    }
    p.loglog_slope = sxy / sxx;
    return p;
}

SkewKurtosis skew_kurtosis(std::span<const double> samples) {
    require(samples.size() >= 30, Errc::insufficient_data, "skewness and kurtosis need at least 30 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    require(m2 > 0.0, Errc::degenerate_data, "samples have zero variance");
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

namespace {

void finish_curve(LossCurve& c, double window) {
    const std::size_t n = c.loss.size();
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(window * static_cast<double>(n - 1)));
    double s = 0.0;
    const std::size_t from = n > k ? n - k : 0;
    for (std::size_t i = from; i < n; ++i) s += c.loss[i];
    c.final_loss = s / static_cast<double>(n - from);
}

// One gradient step; false when the run diverges.
bool descend(Network& net, const std::vector<double>& grad, double lr, const Dataset& data, LossCurve& c,
             double objective, std::size_t step, double threshold) {
    c.objective.push_back(objective);
    auto& p = net.parameters();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * grad[j];
    double loss = std::numeric_limits<double>::infinity();
    try {
        loss = clean_loss(net, data);
    } catch (const Error&) {
    }
    if (!(objective <= threshold) || !(loss <= threshold)) {
        c.diverged = true;
        c.diverged_step = step;
        return false;
    }
    c.loss.push_back(loss);
    return true;
}

void check_training(const TrainOptions& o) {
    require(o.steps >= 1, Errc::argument, "training needs at least one step");
    require(o.learning_rate > 0.0 && std::isfinite(o.learning_rate), Errc::parameter_domain,
            "learning rate must be positive");
    require(o.final_window > 0.0 && o.final_window <= 1.0, Errc::argument, "final window must lie in (0, 1]");
}

}  // namespace

LossCurve train_marginalized(Network net, const NoiseSpec& noise, const Dataset& data, std::size_t M,
                             const TrainOptions& options, const RngStream& stream) {
    check_training(options);
    Rng inj(stream.child(0));
    LossCurve c;
    c.loss.push_back(clean_loss(net, data));
    for (std::size_t s = 1; s <= options.steps; ++s) {
        LossGrad g;
        try {
            g = marginalized_loss_and_grad(net, noise, data, M, inj);
        } catch (const Error& e) {
            if (e.code() != Errc::numerical) throw;
            c.diverged = true;
            c.diverged_step = s;
            break;
        }
        if (!descend(net, g.grad, options.learning_rate, data, c, g.loss, s, options.divergence_threshold)) break;
    }
    finish_curve(c, options.final_window);
    return c;
}

SubstituteCurve substitute_noise_training(Network net, const NoiseSpec& noise, const Dataset& data, std::size_t M_big,
                                          const SubstituteOptions& sub, const TrainOptions& options,
                                          const RngStream& stream) {
    check_training(options);
    require(sub.refit_every >= 1, Errc::argument, "refit interval must be at least 1");
    require(sub.M_small >= 1, Errc::argument, "M_small must be at least 1");
    Rng inj(stream.child(0));
    Rng draws(stream.child(1));
    Rng probe(stream.child(2));
    SubstituteCurve out;
    LossCurve& c = out.curve;
    c.loss.push_back(clean_loss(net, data));
    NoiseFit model;
    bool active = false;
    std::vector<double> diff(net.parameter_count());
    for (std::size_t s = 1; s <= options.steps; ++s) {
        LossGrad g;
        try {
            g = marginalized_loss_and_grad(net, noise, data, M_big, inj);
            if (sub.model != NoiseModelKind::none && (s - 1) % sub.refit_every == 0) {
                const LossGrad small = marginalized_loss_and_grad(net, noise, data, sub.M_small, probe);
                for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = small.grad[j] - g.grad[j];
                double mean = 0.0, var = 0.0;
                for (double v : diff) mean += v / static_cast<double>(diff.size());
                for (double v : diff) var += (v - mean) * (v - mean) / static_cast<double>(diff.size() - 1);
                active = var > 0.0;
                if (active) {
                    StableParams law;
                    if (sub.model == NoiseModelKind::gaussian) {
                        law = StableParams{2.0, std::sqrt(var / 2.0), 0.0, mean};
                    } else {
                        FitOptions fo;
                        fo.standard_errors = false;
                        const StableParams warm = model.params;
                        if (!out.fits.empty()) fo.warm_start = &warm;
                        try {
                            law = mle_fit(diff, fo).params;
                        } catch (const FitError& e) {
                            law = e.best().params;
                        }
                    }
                    model = NoiseFit{s, law};
                    out.fits.push_back(model);
                }
            }
        } catch (const Error& e) {
            if (e.code() != Errc::numerical) throw;
            c.diverged = true;
            c.diverged_step = s;
            break;
        }
        if (active)
            for (std::size_t j = 0; j < g.grad.size(); ++j)
                g.grad[j] += sample_one(model.params, draws);
        if (!descend(net, g.grad, options.learning_rate, data, c, g.loss, s, options.divergence_threshold)) break;
    }
    finish_curve(c, options.final_window);
    return out;
}

double mean_abs_gap(const std::vector<double>& a, const std::vector<double>& b, double trailing_fraction) {
    require(trailing_fraction > 0.0 && trailing_fraction <= 1.0, Errc::argument, "fraction must lie in (0, 1]");
    const std::size_t n = std::min(a.size(), b.size());
    require(n >= 1, Errc::argument, "curves are empty");
    const auto from = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - trailing_fraction)));
    double s = 0.0;
    for (std::size_t i = from; i < n; ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(n - from);
}

}  // namespace levylab
