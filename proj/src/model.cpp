#include "wcl/model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wcl/errors.hpp"

namespace wcl {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

std::size_t param_count(std::span<const std::size_t> layer_sizes) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) n += (layer_sizes[l] + 1) * layer_sizes[l + 1];
    return n;
}

void validate(const ModelParams& params) {
    if (params.layer_sizes.size() < 2) throw ShapeError("model needs at least an input and an output layer");
    for (auto s : params.layer_sizes)
        if (s == 0) throw ShapeError("layer sizes must be positive");
    if (params.values.size() != param_count(params.layer_sizes))
        throw ShapeError("model has " + std::to_string(params.values.size()) + " values, layer sizes imply " +
                         std::to_string(param_count(params.layer_sizes)));
    for (double v : params.values)
        if (!std::isfinite(v)) throw DomainError("model parameters must be finite");
    if (!(params.p_max > 0.0)) throw DomainError("p_max must be positive");
}

std::vector<double> features(const ChannelSample& sample) {
    std::vector<double> x(sample.h_re.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::hypot(sample.h_re[i], sample.h_im[i]);
    return x;
}

ModelParams init_params(std::vector<std::size_t> layer_sizes, double p_max, Rng& rng) {
    ModelParams params;
    params.layer_sizes = std::move(layer_sizes);
    params.p_max = p_max;
    if (params.layer_sizes.size() < 2) throw ShapeError("model needs at least an input and an output layer");
    params.values.assign(param_count(params.layer_sizes), 0.0);

    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < params.layer_sizes.size(); ++l) {
        const std::size_t fan_in = params.layer_sizes[l];
        const std::size_t fan_out = params.layer_sizes[l + 1];
        const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-a, a);
        for (std::size_t i = 0; i < fan_in * fan_out; ++i) params.values[off + i] = dist(rng);
        off += (fan_in + 1) * fan_out;  // biases stay zero
    }
    validate(params);
    return params;
}

ForwardTrace forward(const ModelParams& params, std::span<const double> x) {
    const auto& sizes = params.layer_sizes;
    if (x.size() != sizes.front())
        throw ShapeError("input has " + std::to_string(x.size()) + " features, model expects " +
                         std::to_string(sizes.front()));
    const std::size_t layers = sizes.size() - 1;

    ForwardTrace trace;
    trace.pre_activations.resize(layers);
    trace.activations.resize(layers + 1);
    trace.activations[0].assign(x.begin(), x.end());

    const double* w = params.values.data();
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        const double* b = w + fan_in * fan_out;
        const auto& in = trace.activations[l];
        auto& z = trace.pre_activations[l];
        auto& a = trace.activations[l + 1];
        z.resize(fan_out);
        a.resize(fan_out);
        for (std::size_t o = 0; o < fan_out; ++o) {
            const double* row = w + o * fan_in;
            double acc = b[o];
            for (std::size_t i = 0; i < fan_in; ++i) acc += row[i] * in[i];
            z[o] = acc;
        }
        if (l + 1 < layers) {
            for (std::size_t o = 0; o < fan_out; ++o) a[o] = z[o] > 0.0 ? z[o] : 0.0;
        } else {
            for (std::size_t o = 0; o < fan_out; ++o) a[o] = params.p_max * sigmoid(z[o]);
        }
        w = b + fan_out;
    }
    return trace;
}

void backward_accumulate(const ModelParams& params, const ForwardTrace& trace, std::span<const double> upstream,
                         double scale, std::span<double> grad) {
    const auto& sizes = params.layer_sizes;
    const std::size_t layers = sizes.size() - 1;
    if (trace.activations.size() != layers + 1 || trace.pre_activations.size() != layers)
        throw ShapeError("forward trace does not match the model depth");
    for (std::size_t l = 0; l <= layers; ++l)
        if (trace.activations[l].size() != sizes[l]) throw ShapeError("forward trace does not match layer sizes");
    if (upstream.size() != sizes.back()) throw ShapeError("upstream length does not match the model output");
    if (grad.size() != params.values.size()) throw ShapeError("gradient buffer has the wrong length");

    // Layer offsets into the flat vector.
    std::vector<std::size_t> offset(layers);
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        offset[l] = off;
        off += (sizes[l] + 1) * sizes[l + 1];
    }

    // delta = d<upstream, out> / dz for the output layer; s' = s(1-s).
    std::vector<double> delta(sizes.back());
    {
        const auto& out = trace.activations.back();
        for (std::size_t o = 0; o < delta.size(); ++o) {
            const double s = out[o] / params.p_max;
            delta[o] = scale * upstream[o] * params.p_max * s * (1.0 - s);
        }
    }

    std::vector<double> prev_delta;
    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t fan_in = sizes[l];
        const std::size_t fan_out = sizes[l + 1];
        const double* w = params.values.data() + offset[l];
        double* gw = grad.data() + offset[l];
        double* gb = gw + fan_in * fan_out;
        const auto& in = trace.activations[l];

        for (std::size_t o = 0; o < fan_out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            double* grow = gw + o * fan_in;
            for (std::size_t i = 0; i < fan_in; ++i) grow[i] += d * in[i];
            gb[o] += d;
        }
        if (l == 0) break;

        prev_delta.assign(fan_in, 0.0);
        for (std::size_t o = 0; o < fan_out; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* row = w + o * fan_in;
            for (std::size_t i = 0; i < fan_in; ++i) prev_delta[i] += d * row[i];
        }
        const auto& z = trace.pre_activations[l - 1];
        for (std::size_t i = 0; i < fan_in; ++i)
            if (!(z[i] > 0.0)) prev_delta[i] = 0.0;
        delta.swap(prev_delta);
    }
}

std::vector<double> backward(const ModelParams& params, const ForwardTrace& trace, std::span<const double> upstream) {
    std::vector<double> grad(params.values.size(), 0.0);
    backward_accumulate(params, trace, upstream, 1.0, grad);
    return grad;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    validate(params);
    nlohmann::json j;
    j["layer_sizes"] = params.layer_sizes;
    j["p_max"] = params.p_max;
    j["values"] = params.values;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out << j.dump() << '\n';
    if (!out) throw IoError("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, "", std::string("checkpoint is not valid JSON: ") + e.what());
    }
    ModelParams params;
    const char* field = "layer_sizes";
    try {
        params.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
        field = "p_max";
        params.p_max = j.at("p_max").get<double>();
        field = "values";
        params.values = j.at("values").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(1, field, e.what());
    }
    validate(params);
    return params;
}

}  // namespace wcl
