#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "wcl/channels.hpp"

namespace wcl {

/// Fully-connected power-control network. values stores, layer by layer, the
/// fan_out x fan_in weight matrix (row-major) followed by the fan_out biases.
struct ModelParams {
    std::vector<std::size_t> layer_sizes;
    std::vector<double> values;
    double p_max = 1.0;

    std::size_t input_size() const { return layer_sizes.front(); }
    std::size_t output_size() const { return layer_sizes.back(); }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

std::size_t param_count(std::span<const std::size_t> layer_sizes);

/// Checks layer sizes, value count and finiteness; throws ShapeError / DomainError.
void validate(const ModelParams& params);

/// Activations kept from a forward pass. activations[0] is the input,
/// activations.back() the power output; pre_activations[l] feeds activations[l+1].
struct ForwardTrace {
    std::vector<std::vector<double>> pre_activations;
    std::vector<std::vector<double>> activations;

    std::span<const double> output() const& { return activations.back(); }
    std::span<const double> output() && = delete;  // would dangle
};

/// Row-major channel magnitudes |h_kj|.
std::vector<double> features(const ChannelSample& sample);

ModelParams init_params(std::vector<std::size_t> layer_sizes, double p_max, Rng& rng);

/// ReLU hidden layers, p_max * sigmoid output.
ForwardTrace forward(const ModelParams& params, std::span<const double> x);

/// Adds scale * J^T upstream into grad, J being the Jacobian of the network
/// output with respect to values.
void backward_accumulate(const ModelParams& params, const ForwardTrace& trace, std::span<const double> upstream,
                         double scale, std::span<double> grad);

/// Gradient of <upstream, forward(params, x)> with respect to values.
std::vector<double> backward(const ModelParams& params, const ForwardTrace& trace, std::span<const double> upstream);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace wcl
