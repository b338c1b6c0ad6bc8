#include "wcl/objective.hpp"

#include <algorithm>
#include <cmath>

#include "wcl/errors.hpp"

namespace wcl {

const char* to_string(UpperLoss l) { return l == UpperLoss::MSE ? "mse" : "neg_sum_rate"; }
const char* to_string(LowerLoss l) {
    return l == LowerLoss::WeightedNegSumRate ? "weighted_neg_sum_rate" : "same_as_upper";
}
const char* to_string(AlphaMode m) { return m == AlphaMode::WmmseRatio ? "wmmse_ratio" : "unit"; }

UpperLoss upper_loss_from_string(const std::string& s) {
    if (s == "mse") return UpperLoss::MSE;
    if (s == "neg_sum_rate") return UpperLoss::NegSumRate;
    throw ConfigError("unknown upper loss '" + s + "' (expected mse or neg_sum_rate)");
}

LowerLoss lower_loss_from_string(const std::string& s) {
    if (s == "weighted_neg_sum_rate") return LowerLoss::WeightedNegSumRate;
    if (s == "same_as_upper") return LowerLoss::SameAsUpper;
    throw ConfigError("unknown lower loss '" + s + "' (expected weighted_neg_sum_rate or same_as_upper)");
}

AlphaMode alpha_mode_from_string(const std::string& s) {
    if (s == "wmmse_ratio") return AlphaMode::WmmseRatio;
    if (s == "unit") return AlphaMode::Unit;
    throw ConfigError("unknown alpha_mode '" + s + "' (expected wmmse_ratio or unit)");
}

Batch as_batch(std::span<const ChannelSample> samples) {
    Batch b;
    b.reserve(samples.size());
    for (const auto& s : samples) b.push_back(&s);
    return b;
}

namespace {

// Loss values and their derivatives with respect to the network output p.
struct SampleTerms {
    ForwardTrace trace;
    double ell = 0.0;
    std::vector<double> dell_dp;
    double u = 0.0;
    std::vector<double> du_dp;
};

RateProblem problem_for(const LossSpec& spec, const ChannelSample& s) { return make_problem(s, spec.system); }

void upper_terms(const LossSpec& spec, const ChannelSample& s, std::span<const double> p, double& value,
                 std::vector<double>& dp) {
    dp.assign(p.size(), 0.0);
    if (spec.upper == UpperLoss::MSE) {
        if (s.p_label.empty()) throw MissingLabelError("MSE loss needs a WMMSE power label on every sample");
        if (s.p_label.size() != p.size()) throw ShapeError("power label length does not match the model output");
        value = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double diff = p[k] - s.p_label[k];
            value += diff * diff;
            dp[k] = 2.0 * diff;
        }
    } else {
        const auto prob = problem_for(spec, s);
        value = -sum_rate(prob, p);
        const auto g = grad_sum_rate(prob, p);
        for (std::size_t k = 0; k < p.size(); ++k) dp[k] = -g[k];
    }
}

double rate_scale(const LossSpec& spec, const ChannelSample& s) {
    if (spec.alpha_mode == AlphaMode::Unit) return 1.0;
    if (!s.rbar) throw MissingLabelError("weighted sum-rate loss needs rbar on every sample");
    if (!(*s.rbar > 0.0))
        throw DegenerateSampleError("sample has rbar = " + std::to_string(*s.rbar) + "; the rate ratio is undefined");
    return 1.0 / *s.rbar;
}

SampleTerms eval_terms(const LossSpec& spec, const ModelParams& params, const ChannelSample& s, bool need_upper,
                       bool need_lower) {
    SampleTerms t;
    t.trace = forward(params, features(s));
    const auto p = t.trace.output();
    const bool lower_is_upper = spec.lower == LowerLoss::SameAsUpper;
    if (need_upper || (need_lower && lower_is_upper)) upper_terms(spec, s, p, t.ell, t.dell_dp);
    if (need_lower) {
        if (lower_is_upper) {
            t.u = t.ell;
            t.du_dp = t.dell_dp;
        } else {
            const double a = rate_scale(spec, s);
            const auto prob = problem_for(spec, s);
            t.u = -a * sum_rate(prob, p);
            t.du_dp = grad_sum_rate(prob, p);
            for (auto& d : t.du_dp) d *= -a;
        }
    }
    return t;
}

void check_u(double u) {
    if (!(std::abs(u) <= kMaxAbsLowerLoss))
        throw DomainError("lower-level loss u = " + std::to_string(u) + " exceeds the exp() guard of " +
                          std::to_string(kMaxAbsLowerLoss));
}

void require_nonempty(const Batch& b, const char* what) {
    if (b.empty()) throw DomainError(std::string(what) + ": empty batch");
}

}  // namespace

LossValue loss_upper(const LossSpec& spec, const ModelParams& params, const ChannelSample& sample) {
    auto t = eval_terms(spec, params, sample, true, false);
    return {t.ell, backward(params, t.trace, t.dell_dp)};
}

LossValue loss_lower_u(const LossSpec& spec, const ModelParams& params, const ChannelSample& sample) {
    auto t = eval_terms(spec, params, sample, false, true);
    return {t.u, backward(params, t.trace, t.du_dp)};
}

std::vector<double> lower_values(const LossSpec& spec, const ModelParams& params, const Batch& batch) {
    std::vector<double> u;
    u.reserve(batch.size());
    for (const auto* s : batch) u.push_back(eval_terms(spec, params, *s, false, true).u);
    return u;
}

std::vector<double> softmax_weights(std::span<const double> u_values) {
    if (u_values.empty()) return {};
    for (double u : u_values) check_u(u);
    const double m = *std::max_element(u_values.begin(), u_values.end());
    std::vector<double> lam(u_values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) total += (lam[i] = std::exp(u_values[i] - m));
    for (auto& l : lam) l /= total;
    return lam;
}

GradValue g_eval(const LossSpec& spec, const ModelParams& params, const Batch& batch) {
    require_nonempty(batch, "g_eval");
    GradValue out{0.0, std::vector<double>(params.values.size(), 0.0)};
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto* s : batch) {
        auto t = eval_terms(spec, params, *s, false, true);
        check_u(t.u);
        const double e = std::exp(t.u);
        out.value += e;
        backward_accumulate(params, t.trace, t.du_dp, e * inv_n, out.grad);
    }
    out.value *= inv_n;
    return out;
}

double g_value(const LossSpec& spec, const ModelParams& params, const Batch& batch) {
    require_nonempty(batch, "g_value");
    double acc = 0.0;
    for (const auto* s : batch) {
        const double u = eval_terms(spec, params, *s, false, true).u;
        check_u(u);
        acc += std::exp(u);
    }
    return acc / static_cast<double>(batch.size());
}

FValue f_eval(const LossSpec& spec, const ModelParams& params, const Batch& batch, double z, double z_floor) {
    require_nonempty(batch, "f_eval");
    if (!(z > 0.0) || !(std::abs(z) >= z_floor)) throw TrackingCollapseError(-1, z);
    const double n = static_cast<double>(batch.size());
    FValue out{0.0, 0.0, std::vector<double>(params.values.size(), 0.0)};
    double weighted = 0.0;  // sum exp(u_i) l_i
    std::vector<double> upstream;
    for (const auto* s : batch) {
        auto t = eval_terms(spec, params, *s, true, true);
        check_u(t.u);
        const double e = std::exp(t.u);
        weighted += e * t.ell;
        // exp(u) (l grad u + grad l), pushed through J^T in one pass.
        upstream.resize(t.du_dp.size());
        for (std::size_t k = 0; k < upstream.size(); ++k) upstream[k] = t.ell * t.du_dp[k] + t.dell_dp[k];
        backward_accumulate(params, t.trace, upstream, e / (n * z), out.grad2);
    }
    out.value = weighted / (n * z);
    out.grad1 = -weighted / (n * z * z);
    return out;
}

namespace {

struct ShiftedEval {
    double shift = 0.0;       // max u
    double g_shifted = 0.0;   // mean exp(u - shift)
    double s_shifted = 0.0;   // sum exp(u - shift) l
    std::vector<double> grad_g_shifted;
    std::vector<double> grad2_numer_shifted;  // sum exp(u - shift)(l grad u + grad l)
};

ShiftedEval shifted_eval(const LossSpec& spec, const ModelParams& params, const Batch& dataset) {
    require_nonempty(dataset, "full_objective");
    std::vector<SampleTerms> terms;
    terms.reserve(dataset.size());
    for (const auto* s : dataset) {
        terms.push_back(eval_terms(spec, params, *s, true, true));
        check_u(terms.back().u);
    }
    ShiftedEval ev;
    ev.shift = terms.front().u;
    for (const auto& t : terms) ev.shift = std::max(ev.shift, t.u);
    ev.grad_g_shifted.assign(params.values.size(), 0.0);
    ev.grad2_numer_shifted.assign(params.values.size(), 0.0);

    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    std::vector<double> upstream;
    for (const auto& t : terms) {
        const double e = std::exp(t.u - ev.shift);
        ev.g_shifted += e * inv_n;
        ev.s_shifted += e * t.ell;
        backward_accumulate(params, t.trace, t.du_dp, e * inv_n, ev.grad_g_shifted);
        upstream.resize(t.du_dp.size());
        for (std::size_t k = 0; k < upstream.size(); ++k) upstream[k] = t.ell * t.du_dp[k] + t.dell_dp[k];
        backward_accumulate(params, t.trace, upstream, e, ev.grad2_numer_shifted);
    }
    return ev;
}

}  // namespace

FullObjective full_objective(const LossSpec& spec, const ModelParams& params, const Batch& dataset) {
    const auto ev = shifted_eval(spec, params, dataset);
    const double n = static_cast<double>(dataset.size());
    const double z = ev.g_shifted;
    const double grad1 = -ev.s_shifted / (n * z * z);
    FullObjective out;
    out.value = ev.s_shifted / (n * z);
    out.grad.resize(params.values.size());
    for (std::size_t i = 0; i < out.grad.size(); ++i)
        out.grad[i] = ev.grad_g_shifted[i] * grad1 + ev.grad2_numer_shifted[i] / (n * z);
    return out;
}

CompositionalEval compositional_eval(const LossSpec& spec, const ModelParams& params, const Batch& dataset) {
    const auto ev = shifted_eval(spec, params, dataset);
    const double n = static_cast<double>(dataset.size());
    const double scale = std::exp(ev.shift);
    CompositionalEval out;
    out.g_value = ev.g_shifted * scale;
    const double s = ev.s_shifted * scale;
    out.f_value = s / (n * out.g_value);
    out.grad1_f = -s / (n * out.g_value * out.g_value);
    out.grad_g = ev.grad_g_shifted;
    for (auto& x : out.grad_g) x *= scale;
    out.grad2_f = ev.grad2_numer_shifted;
    for (auto& x : out.grad2_f) x *= scale / (n * out.g_value);
    return out;
}

LossValue mean_upper(const LossSpec& spec, const ModelParams& params, const Batch& batch) {
    require_nonempty(batch, "mean_upper");
    LossValue out{0.0, std::vector<double>(params.values.size(), 0.0)};
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto* s : batch) {
        auto t = eval_terms(spec, params, *s, true, false);
        out.value += t.ell * inv_n;
        backward_accumulate(params, t.trace, t.dell_dp, inv_n, out.grad);
    }
    return out;
}

WeightedLoss weighted_upper(const LossSpec& spec, const ModelParams& params, const Batch& batch,
                            std::span<const double> weights) {
    if (weights.size() != batch.size()) throw ShapeError("weight vector does not match the batch");
    WeightedLoss out{0.0, std::vector<double>(params.values.size(), 0.0), {}};
    out.per_sample.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto t = eval_terms(spec, params, *batch[i], true, false);
        out.per_sample.push_back(t.ell);
        out.value += weights[i] * t.ell;
        if (weights[i] != 0.0) backward_accumulate(params, t.trace, t.dell_dp, weights[i], out.grad);
    }
    return out;
}

}  // namespace wcl
