#ifndef LEVYLAB_GNI_HPP
#define LEVYLAB_GNI_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "levylab/rng.hpp"
#include "levylab/stable.hpp"

namespace levylab {

enum class Activation { relu, elu, linear };
enum class LossKind { mse, cross_entropy };
enum class NoiseMode { additive, multiplicative };

const char* activation_name(Activation a) noexcept;
const char* loss_name(LossKind l) noexcept;
const char* noise_mode_name(NoiseMode m) noexcept;

struct NetworkSpec {
    std::vector<std::size_t> widths{1, 16, 16, 16, 1};  // n_0 .. n_L
    Activation activation = Activation::relu;
    LossKind loss = LossKind::mse;
    bool bias = true;
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
    RngStream init{0, 0};

    std::size_t layers() const noexcept { return widths.size() - 1; }
    void validate() const;
};

struct NoiseSpec {
    NoiseMode mode = NoiseMode::additive;
    std::vector<double> variances;  // sigma^2 for layers 0 .. L-1

    bool is_zero() const noexcept;
    void validate(const NetworkSpec& net) const;
    static NoiseSpec uniform(NoiseMode mode, std::size_t layers, double variance);
};

// Inputs and targets stored column by column, one column per example.
struct Dataset {
    std::size_t n = 0, in_dim = 0, out_dim = 0;
    std::vector<double> x;  // in_dim * n
    std::vector<double> y;  // out_dim * n
    std::string id;
};

// x ~ U[-1, 1], y = sum_i sin(2 pi q_i x).
Dataset sinusoid_dataset(std::size_t n_points, const std::vector<double>& q_list, Rng& rng);

// Injection draws for one pass: layer i holds n_i x n entries, column-major.
struct NoiseDraw {
    NoiseMode mode = NoiseMode::additive;
    std::vector<std::vector<double>> eps;
};

class Network {
public:
    explicit Network(NetworkSpec spec);

    const NetworkSpec& spec() const noexcept { return spec_; }
    std::size_t layers() const noexcept { return spec_.layers(); }
    std::size_t parameter_count() const noexcept { return params_.size(); }
    std::vector<double>& parameters() noexcept { return params_; }
    const std::vector<double>& parameters() const noexcept { return params_; }
    // Layer i in 1..L: row-major n_i x n_{i-1} weights followed by n_i biases.
    std::size_t weight_offset(std::size_t i) const noexcept { return w_off_[i - 1]; }
    std::size_t bias_offset(std::size_t i) const noexcept { return b_off_[i - 1]; }
    std::size_t weight_index(std::size_t i, std::size_t in, std::size_t out) const noexcept;
    std::size_t weight_count() const noexcept;

private:
    NetworkSpec spec_;
    std::vector<double> params_;
    std::vector<std::size_t> w_off_, b_off_;
};

NoiseDraw draw_noise(const Network& net, const NoiseSpec& noise, std::size_t n_examples, Rng& rng);

struct ForwardTrace {
    std::vector<std::vector<double>> noised;       // h~_0 .. h~_L
    std::vector<std::vector<double>> clean;        // h_0 .. h_L
    std::vector<std::vector<double>> accumulated;  // E_i = h~_i - h_i
};

ForwardTrace forward_noised(const Network& net, const NoiseSpec& noise, std::span<const double> x, Rng& rng);
ForwardTrace forward_noised(const Network& net, const NoiseDraw& draw, std::span<const double> x);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

// Full-batch loss and gradient; a null draw gives the clean objective.
LossGrad loss_and_grad(const Network& net, const Dataset& data, const NoiseDraw* draw = nullptr);
double clean_loss(const Network& net, const Dataset& data);
// (1/M) sum of M independently noised objectives; collapses to the clean
// objective when every variance is zero.
LossGrad marginalized_loss_and_grad(const Network& net, const NoiseSpec& noise, const Dataset& data, std::size_t M,
                                    Rng& rng);

struct GradientNoiseSample {
    // draws x weights, one row per fresh injection draw.
    std::vector<double> values;
    std::size_t draws = 0;
    std::size_t weights = 0;
    std::vector<std::size_t> widths;
    std::vector<std::size_t> layer_offsets;  // start of each layer's weights within a row, plus the end
    std::size_t M = 0;
    std::string dataset_id;
    RngStream seed;

    double at(std::size_t draw, std::size_t layer, std::size_t in, std::size_t out) const;
    std::vector<double> layer_values(std::size_t layer) const;  // layer in 1..L, pooled over draws
};

// grad dL(eps*) - (1/M) sum_m grad dL(eps_m) per weight for one fresh eps*.
GradientNoiseSample implicit_gradient_noise(const Network& net, const NoiseSpec& noise, const Dataset& data,
                                            std::size_t M, Rng& rng);
// Many fresh draws against one shared M-draw reference mean.
GradientNoiseSample implicit_gradient_noise_batch(const Network& net, const NoiseSpec& noise, const Dataset& data,
                                                  std::size_t M, std::size_t draws, Rng& rng);

struct MomentProfile {
    std::vector<int> orders;
    std::vector<double> norms;  // E[|X|^m]^{1/m}
    // Least squares of log ||X||_m = log C + r log Gamma(m + 1) / m over m in [2, m_max].
    double r_hat = 0.0;
    double residual = 0.0;
    double log_c = 0.0;
    // Plain least-squares slope of log ||X||_m on log m over the same orders.
    double loglog_slope = 0.0;
};

MomentProfile moment_profile(std::span<const double> samples, int m_max = 8);

struct SkewKurtosis {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

SkewKurtosis skew_kurtosis(std::span<const double> samples);

struct TrainOptions {
    std::size_t steps = 1000;
    double learning_rate = 0.1;
    double divergence_threshold = 1e6;
    // Fraction of trailing steps averaged into final_loss.
    double final_window = 0.1;
};

struct LossCurve {
    std::vector<double> loss;       // clean full-batch loss; loss[0] before training
    std::vector<double> objective;  // marginalized noised objective at each step
    bool diverged = false;
    std::size_t diverged_step = 0;
    double final_loss = 0.0;
};

// Plain gradient descent on the M-marginalized objective with fresh draws each step.
LossCurve train_marginalized(Network net, const NoiseSpec& noise, const Dataset& data, std::size_t M,
                             const TrainOptions& options, const RngStream& rng);

enum class NoiseModelKind { none, gaussian, stable };

const char* noise_model_name(NoiseModelKind k) noexcept;

struct SubstituteOptions {
    NoiseModelKind model = NoiseModelKind::stable;
    // The noise model is refitted every refit_every steps.
    std::size_t refit_every = 10;
    std::size_t M_small = 1;
};

struct NoiseFit {
    std::size_t step = 0;
    // Gaussian fits use alpha = 2 and sigma = sd / sqrt(2).
    StableParams params;
};

struct SubstituteCurve {
    LossCurve curve;
    std::vector<NoiseFit> fits;
};

// Gradient descent on the M_big objective with i.i.d. per-parameter draws
// from one law fitted to the M_small-minus-M_big gradient difference pooled
// over all parameters.
SubstituteCurve substitute_noise_training(Network net, const NoiseSpec& noise, const Dataset& data, std::size_t M_big,
                                          const SubstituteOptions& sub, const TrainOptions& options,
                                          const RngStream& rng);

// Mean |a_k - b_k| over the trailing fraction of two curves.
double mean_abs_gap(const std::vector<double>& a, const std::vector<double>& b, double trailing_fraction = 0.5);

}  // namespace levylab

#endif
