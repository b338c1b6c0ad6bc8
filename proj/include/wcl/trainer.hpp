#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wcl/model.hpp"
#include "wcl/objective.hpp"

namespace wcl {

enum class StepSchedule {
    Constant,     // alpha, beta as configured
    InverseSqrt,  // beta = 1/sqrt(K), alpha = beta / L0
};

struct ScscConfig {
    double alpha = 1e-3;
    double beta = 0.1;
    StepSchedule schedule = StepSchedule::Constant;
    double l0 = 10.0;
    double y_floor = 1e-8;
    std::size_t minibatch_xi = 32;
    std::size_t minibatch_phi = 32;
};

/// State of the two-sequence stochastic compositional loop.
struct TrainerState {
    ModelParams params;
    ModelParams params_prev;
    double y = 0.0;  // tracks g(Theta) over the training pool; > 0 once initialised
    std::int64_t step = 0;
    double alpha = 1e-3;
    double beta = 0.1;
    Rng rng;
};

/// Fresh state with params_prev = params and y unset.
TrainerState make_trainer_state(ModelParams params, double alpha, double beta, std::uint64_t seed);

/// One SCSC iteration. y is advanced first,
///   y+ = (1 - beta)(y + g(Theta; phi) - g(Theta_prev; phi)) + beta g(Theta; phi),
/// then Theta moves along grad g(Theta; phi) * grad1 f(y+; Theta; xi) + grad2 f(y+; Theta; xi).
TrainerState scsc_step(TrainerState state, const LossSpec& spec, const Batch& batch_xi, const Batch& batch_phi,
                       double y_floor = 1e-8);

struct ScscStepInfo {
    std::int64_t step = 0;             // k, counted within this train call from 0
    const ModelParams* params = nullptr;  // Theta^k, before the update
    double y_next = 0.0;               // y^{k+1}
    double g_minibatch = 0.0;          // g(Theta^k; phi^k)
};
using ScscObserver = std::function<void(const ScscStepInfo&)>;

/// K SCSC steps with independent uniform (with replacement) minibatches drawn from
/// pool. y is re-initialised to g(Theta^0; phi) on a first minibatch and
/// params_prev reset to params, because the pool changes between calls.
TrainerState scsc_train(TrainerState state, const LossSpec& spec, std::span<const ChannelSample> pool,
                        std::int64_t iters, const ScscConfig& cfg, const ScscObserver& observer = {});

/// Per-iteration record for gd_train when a trace is requested.
struct GdRecord {
    std::int64_t step = 0;
    double value = 0.0;
    double grad_norm_sq = 0.0;
};

/// Full-batch gradient descent on F = f(g(Theta); Theta). Records F and ||grad F||^2
/// at every visited iterate Theta^0..Theta^iters when trace is non-null.
ModelParams gd_train(ModelParams params, const LossSpec& spec, std::span<const ChannelSample> dataset,
                     std::int64_t iters, double alpha, std::vector<GdRecord>* trace = nullptr);

/// Epoch loop over shuffled minibatches minimising the unweighted mean upper loss.
ModelParams sgd_train(ModelParams params, const LossSpec& spec, std::span<const ChannelSample> dataset,
                      std::int64_t epochs, std::size_t minibatch, double alpha, Rng& rng);

struct DualWeights {
    std::vector<double> lambda;

    static DualWeights uniform(std::size_t n);
    /// Throws DomainError unless entries are >= 0 and sum to 1 within tol.
    void validate(double tol = 1e-12) const;
};

struct GdaResult {
    ModelParams params;
    DualWeights dual;
};

/// Two-timescale descent/ascent on sum_i lambda_i l_i. Theta takes a gradient step,
/// lambda an exponentiated-gradient step followed by renormalisation. minibatch = 0
/// uses the full dataset every iteration; otherwise a uniform minibatch gives an
/// unbiased estimate of both gradients and only sampled duals move.
GdaResult gda_train(ModelParams params, DualWeights dual, const LossSpec& spec, std::span<const ChannelSample> dataset,
                    std::int64_t iters, double alpha_theta, double alpha_lambda, std::size_t minibatch = 0,
                    Rng* rng = nullptr);

/// CSV trace writer for scsc_train: step,F,grad_norm,y,tracking_error. F, grad_norm
/// and tracking_error are evaluated on the full pool.
ScscObserver make_trace_writer(std::ostream& out, const LossSpec& spec, std::span<const ChannelSample> pool);

}  // namespace wcl
