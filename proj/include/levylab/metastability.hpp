#ifndef LEVYLAB_METASTABILITY_HPP
#define LEVYLAB_METASTABILITY_HPP

#include <cstddef>
#include <limits>
#include <vector>

#include "levylab/potentials.hpp"
#include "levylab/rng.hpp"
#include "levylab/sde.hpp"

namespace levylab {

struct WellSpec {
    double s_prev = -std::numeric_limits<double>::infinity();
    double m = 0.0;
    double s_next = std::numeric_limits<double>::infinity();
    double delta_exit = 0.1;

    void validate() const;
    double lower() const noexcept { return s_prev + delta_exit; }
    double upper() const noexcept { return s_next - delta_exit; }
};

// Well i of a potential, bounded by its neighbouring maxima (infinite at the ends).
WellSpec well_of(const Potential& potential, std::size_t index, double delta_exit = 0.1);

enum class ExitSide { left, right, none };

const char* exit_side_name(ExitSide side) noexcept;

struct ExitRecord {
    double exit_time = 0.0;
    ExitSide side = ExitSide::none;
    bool censored = false;
    std::size_t steps = 0;
    double final_position = 0.0;
    RngStream seed;
};

struct ExitRates {
    double left = 0.0;
    double right = 0.0;
    double total() const noexcept { return left + right; }
};

// Left and right jump rates (1 -/+ theta)/2 C_alpha |(s - m)/eps|^{-alpha}.
ExitRates exit_rates(const WellSpec& well, double epsilon, double alpha, double theta);
double exit_rate_analytic(const WellSpec& well, double epsilon, double alpha, double theta);

// Euler-Maruyama from w0 = m until the post-step iterate leaves
// [s_prev + delta_exit, s_next - delta_exit].
ExitRecord simulate_exit(const Potential& potential, const WellSpec& well, double epsilon, double alpha,
                         double theta, double dt, std::size_t max_steps, const RngStream& rng);

struct ExitLawResult {
    std::size_t used = 0;
    std::size_t censored = 0;
    double censored_fraction = 0.0;
    double mean_scaled = 0.0;       // mean of rate * exit_time
    double mean_standard_error = 0.0;
    double ks = 0.0;
    double critical = 0.0;          // 1% critical value
    double p_value = 1.0;
    bool pass = false;
};

// KS test of rate * exit_time against Exp(1) at the 1% level.
ExitLawResult exit_law_test(const std::vector<ExitRecord>& records, double rate);

struct ExitSideResult {
    std::size_t left = 0;
    std::size_t right = 0;
    double predicted_right = 0.5;
    double p_value = 1.0;
    bool pass = false;
};

ExitSideResult exit_side_test(const std::vector<ExitRecord>& records, const ExitRates& rates);

struct TransitionMatrix {
    std::size_t n = 0;
    std::vector<double> q;      // row-major n x n, diagonal -q_i
    std::vector<double> rates;  // q_i

    double operator()(std::size_t i, std::size_t j) const noexcept { return q[i * n + j]; }
};

TransitionMatrix transition_matrix(const std::vector<double>& minima, const std::vector<double>& saddles,
                                   double alpha, double theta);

struct Occupancy {
    double pi1 = 0.5;
    double pi2 = 0.5;
};

// pi2 / pi1 = ((1 + theta) / (1 - theta)) (m2 / |m1|)^alpha.
Occupancy double_well_occupancy(double m1, double m2, double alpha, double theta);

struct OccupancyRun {
    double right_fraction = 0.0;
    std::size_t steps = 0;
    bool blowup = false;
};

// Step-weighted fraction of post-burn-in iterates above the threshold.
OccupancyRun occupancy_fraction(const SdeProblem& problem, double threshold, std::size_t burn_in);

}  // namespace levylab

#endif
