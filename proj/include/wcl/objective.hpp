#pragma once

#include <span>
#include <string>
#include <vector>

#include "wcl/channels.hpp"
#include "wcl/model.hpp"
#include "wcl/wsr.hpp"

namespace wcl {

enum class UpperLoss { MSE, NegSumRate };
enum class LowerLoss { WeightedNegSumRate, SameAsUpper };

/// How the lower-level rate is normalised: by the WMMSE rate of the sample, or not at all.
enum class AlphaMode { WmmseRatio, Unit };

struct LossSpec {
    UpperLoss upper = UpperLoss::MSE;
    LowerLoss lower = LowerLoss::WeightedNegSumRate;
    AlphaMode alpha_mode = AlphaMode::WmmseRatio;
    SystemParams system;
};

const char* to_string(UpperLoss l);
const char* to_string(LowerLoss l);
const char* to_string(AlphaMode m);
UpperLoss upper_loss_from_string(const std::string& s);
LowerLoss lower_loss_from_string(const std::string& s);
AlphaMode alpha_mode_from_string(const std::string& s);

/// Upper bound on |u| before exponentiation.
inline constexpr double kMaxAbsLowerLoss = 50.0;

/// A minibatch or dataset, as references into storage owned elsewhere.
using Batch = std::vector<const ChannelSample*>;
Batch as_batch(std::span<const ChannelSample> samples);

struct LossValue {
    double value = 0.0;
    std::vector<double> grad;  // over the flat parameter vector
};

/// Training loss l: ||p_label - pi||^2 or -R(pi).
LossValue loss_upper(const LossSpec& spec, const ModelParams& params, const ChannelSample& sample);

/// Lower-level loss u: -R(pi)/rbar (or -R(pi) with AlphaMode::Unit), or l itself.
LossValue loss_lower_u(const LossSpec& spec, const ModelParams& params, const ChannelSample& sample);

/// Lower-level losses only, no gradients.
std::vector<double> lower_values(const LossSpec& spec, const ModelParams& params, const Batch& batch);

/// lambda_i = exp(u_i) / sum_j exp(u_j), evaluated with a max shift.
/// Throws DomainError if any |u_i| exceeds kMaxAbsLowerLoss.
std::vector<double> softmax_weights(std::span<const double> u_values);

struct GradValue {
    double value = 0.0;
    std::vector<double> grad;
};

/// g(Theta; batch) = mean of exp(u_i) and its gradient mean exp(u_i) grad u_i.
GradValue g_eval(const LossSpec& spec, const ModelParams& params, const Batch& batch);
double g_value(const LossSpec& spec, const ModelParams& params, const Batch& batch);

struct FValue {
    double value = 0.0;
    double grad1 = 0.0;          // d f / d z
    std::vector<double> grad2;   // d f / d Theta at fixed z
};

/// f(z; Theta; batch) = sum exp(u_i) l_i / (|batch| z). Throws TrackingCollapseError
/// when z is below z_floor.
FValue f_eval(const LossSpec& spec, const ModelParams& params, const Batch& batch, double z, double z_floor = 1e-8);

/// Both oracles at z = g(Theta), unshifted.
struct CompositionalEval {
    double g_value = 0.0;
    double f_value = 0.0;
    std::vector<double> grad_g;
    double grad1_f = 0.0;
    std::vector<double> grad2_f;
};

struct FullObjective {
    double value = 0.0;          // F = f(g(Theta); Theta) = sum lambda_i l_i
    std::vector<double> grad;    // grad g * grad1 f + grad2 f
};

/// Full-batch objective. exp(u) is shifted by max u in both f and g, which leaves
/// F and its gradient unchanged.
FullObjective full_objective(const LossSpec& spec, const ModelParams& params, const Batch& dataset);

/// Raw oracle values of the compositional form on a whole dataset.
CompositionalEval compositional_eval(const LossSpec& spec, const ModelParams& params, const Batch& dataset);

/// Unweighted mean of l over the batch, with gradient.
LossValue mean_upper(const LossSpec& spec, const ModelParams& params, const Batch& batch);

/// sum_i weights[i] * l_i with gradient; also returns the per-sample l_i.
struct WeightedLoss {
    double value = 0.0;
    std::vector<double> grad;
    std::vector<double> per_sample;
};
WeightedLoss weighted_upper(const LossSpec& spec, const ModelParams& params, const Batch& batch,
                            std::span<const double> weights);

}  // namespace wcl
