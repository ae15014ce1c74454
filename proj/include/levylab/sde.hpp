#ifndef LEVYLAB_SDE_HPP
#define LEVYLAB_SDE_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "levylab/fracdrift.hpp"
#include "levylab/potentials.hpp"
#include "levylab/rng.hpp"

namespace levylab {

enum class ScheduleKind { constant, polynomial };

struct StepSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double eta0 = 0.01;
    double rho = 0.0;

    // Step used to move from w_{k-1} to w_k, for k >= 1.
    double eta(std::size_t k) const noexcept;
    void validate() const;

    static StepSchedule constant(double eta) { return {ScheduleKind::constant, eta, 0.0}; }
    static StepSchedule polynomial(double eta0, double rho) { return {ScheduleKind::polynomial, eta0, rho}; }
};

enum class DriftKind { unmodified, afld };

const char* drift_kind_name(DriftKind kind) noexcept;

struct IntegratorOptions {
    double blowup_threshold = 1e6;
    // A step whose drift displacement exceeds drift_cap * (1 + |w|) integrates
    // the drift in substeps of at most that length; the default leaves the
    // recursion untouched.
    double drift_cap = std::numeric_limits<double>::infinity();
    bool record_increments = false;
    // Positive values replace the fractional drift on [-radius, radius] by a
    // cubic spline through exact values spaced drift_table_step apart.
    double drift_table_step = 0.0;
    double drift_table_radius = 5.0;
};

struct Trajectory {
    std::vector<double> iterates;    // w_0 .. w_N
    std::vector<double> etas;        // etas[k] = eta_k, etas[0] = 0
    std::vector<double> increments;  // noise terms eps * eta^{1/alpha} * dL, when recorded
    StepSchedule schedule;
    RngStream seed;
    DriftKind drift = DriftKind::unmodified;
    double alpha = 0.0, theta = 0.0, epsilon = 0.0;
    std::size_t requested_steps = 0;
    bool blowup = false;
    std::size_t blowup_step = 0;
    std::string blowup_reason;
};

// Called with (k, eta_k, w_k) for every accepted iterate, starting at k = 0.
using StepObserver = std::function<void(std::size_t, double, double)>;

struct RunSummary {
    std::size_t steps = 0;
    bool blowup = false;
    std::size_t blowup_step = 0;
    std::string blowup_reason;
    double final_value = 0.0;
};

struct SdeProblem {
    const Potential* potential = nullptr;
    double alpha = 1.5;
    double theta = 0.0;
    double epsilon = 1.0;
    StepSchedule schedule;
    std::size_t n_steps = 0;
    double w0 = 0.0;
    RngStream rng;
    DriftKind drift = DriftKind::unmodified;
    DriftApproxParams approx;
    IntegratorOptions options;
};

RunSummary run_sde(const SdeProblem& problem, const StepObserver& observer,
                   std::vector<double>* increments = nullptr);

Trajectory euler_maruyama(const Potential& potential, double alpha, double theta, double epsilon,
                          const StepSchedule& schedule, std::size_t n_steps, double w0, const RngStream& rng,
                          const IntegratorOptions& options = {});

Trajectory simulate_afld(const Potential& potential, double alpha, double theta, double epsilon,
                         const DriftApproxParams& approx, const StepSchedule& schedule, std::size_t n_steps,
                         double w0, const RngStream& rng, const IntegratorOptions& options = {});

// (1/H) sum eta_k g(w_k) over k > burn_in.
double weighted_time_average(const Trajectory& traj, const std::function<double(double)>& g, std::size_t burn_in);

// Streaming form of weighted_time_average.
class WeightedAverage {
public:
    WeightedAverage(std::function<double(double)> g, std::size_t burn_in) : g_(std::move(g)), burn_in_(burn_in) {}
    void operator()(std::size_t k, double eta, double w);
    double value() const;
    double weight() const noexcept { return h_; }

private:
    std::function<double(double)> g_;
    std::size_t burn_in_;
    double h_ = 0.0, s_ = 0.0;
};

}  // namespace levylab

#endif
