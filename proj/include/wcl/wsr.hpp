#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wcl/channels.hpp"

namespace wcl {

/// Noise power, transmit budget and link weights shared by every sample of a run.
struct SystemParams {
    double p_max = 1.0;
    double noise = 1.0;   // sigma_k^2, same for every receiver
    double weight = 1.0;  // alpha_k, same for every link

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Weighted sum-rate problem on gain magnitudes. gains is K x K row-major,
/// gains[k*K + j] = |h_kj|^2.
struct RateProblem {
    std::size_t k = 0;
    std::vector<double> gains;
    std::vector<double> weights;
    std::vector<double> noise;
    double p_max = 1.0;

    double gain(std::size_t row, std::size_t col) const { return gains[row * k + col]; }
};

/// Validates the invariants (finite nonnegative gains, positive weights and noise).
RateProblem make_problem(std::size_t k, std::vector<double> gains, std::vector<double> weights,
                         std::vector<double> noise, double p_max);
RateProblem make_problem(const ChannelSample& sample, const SystemParams& sys);

/// Sum over links of alpha_k * ln(1 + SINR_k). Throws DomainError if p leaves [0, p_max]^K.
double sum_rate(const RateProblem& prob, std::span<const double> p);

/// Closed-form dR/dp_k: the direct-gain term minus the interference each link k
/// inflicts on the others.
std::vector<double> grad_sum_rate(const RateProblem& prob, std::span<const double> p);

struct PowerSolution {
    std::vector<double> p;
    double rate = 0.0;
};

/// SISO WMMSE started from full power. Stops when successive rates differ by
/// less than tol or after max_iters; returns the best iterate seen.
PowerSolution wmmse(const RateProblem& prob, int max_iters = 500, double tol = 1e-6);

/// Exhaustive search over a uniform grid on [0, p_max]^K including both
/// endpoints. Throws CapabilityError for K > 3.
PowerSolution brute_force_opt(const RateProblem& prob, std::size_t grid_points_per_dim);

}  // namespace wcl
