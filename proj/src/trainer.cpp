#include "wcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include "wcl/errors.hpp"

namespace wcl {

namespace {

void check_finite(const std::vector<double>& values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v))
            throw DivergenceError(std::string(what) + " produced non-finite parameters; try a smaller stepsize");
}

Batch draw_minibatch(std::span<const ChannelSample> pool, std::size_t size, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    Batch b(size);
    for (auto& s : b) s = &pool[pick(rng)];
    return b;
}

double sq_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

}  // namespace

TrainerState make_trainer_state(ModelParams params, double alpha, double beta, std::uint64_t seed) {
    TrainerState s;
    s.params_prev = params;
    s.params = std::move(params);
    s.alpha = alpha;
    s.beta = beta;
    s.rng.seed(seed);
    return s;
}

TrainerState scsc_step(TrainerState state, const LossSpec& spec, const Batch& batch_xi, const Batch& batch_phi,
                       double y_floor) {
    if (batch_xi.empty() || batch_phi.empty()) throw DomainError("scsc_step: minibatches must be nonempty");
    if (!(state.y > y_floor)) throw TrackingCollapseError(state.step, state.y);

    const auto g_now = g_eval(spec, state.params, batch_phi);
    const double g_prev = state.params_prev.values == state.params.values
                              ? g_now.value
                              : g_value(spec, state.params_prev, batch_phi);
    const double beta = state.beta;
    const double y_next = (1.0 - beta) * (state.y + g_now.value - g_prev) + beta * g_now.value;
    if (!std::isfinite(y_next) || !(y_next >= y_floor)) throw TrackingCollapseError(state.step, y_next);

    const auto f = f_eval(spec, state.params, batch_xi, y_next, y_floor);

    ModelParams next = state.params;
    for (std::size_t i = 0; i < next.values.size(); ++i)
        next.values[i] -= state.alpha * (g_now.grad[i] * f.grad1 + f.grad2[i]);
    check_finite(next.values, "scsc_step");

    state.params_prev = std::move(state.params);
    state.params = std::move(next);
    state.y = y_next;
    ++state.step;
    return state;
}

TrainerState scsc_train(TrainerState state, const LossSpec& spec, std::span<const ChannelSample> pool,
                        std::int64_t iters, const ScscConfig& cfg, const ScscObserver& observer) {
    if (pool.empty()) throw DomainError("scsc_train: empty training pool");
    if (iters <= 0) return state;
    if (cfg.minibatch_xi == 0 || cfg.minibatch_phi == 0) throw ConfigError("SCSC minibatch sizes must be positive");

    if (cfg.schedule == StepSchedule::InverseSqrt) {
        state.beta = 1.0 / std::sqrt(static_cast<double>(iters));
        state.alpha = state.beta / cfg.l0;
    } else {
        state.alpha = cfg.alpha;
        state.beta = cfg.beta;
    }
    if (!(state.alpha > 0.0) || !(state.beta > 0.0 && state.beta <= 1.0))
        throw ConfigError("SCSC needs alpha > 0 and beta in (0, 1]");

    state.params_prev = state.params;
    state.y = g_value(spec, state.params, draw_minibatch(pool, cfg.minibatch_phi, state.rng));
    if (!(state.y > cfg.y_floor)) throw TrackingCollapseError(state.step, state.y);

    for (std::int64_t k = 0; k < iters; ++k) {
        const auto xi = draw_minibatch(pool, cfg.minibatch_xi, state.rng);
        const auto phi = draw_minibatch(pool, cfg.minibatch_phi, state.rng);
        if (observer) {
            ModelParams before = state.params;
            state = scsc_step(std::move(state), spec, xi, phi, cfg.y_floor);
            // y+ is computed from g(Theta^k; phi); recover it for the observer.
            observer(ScscStepInfo{k, &before, state.y, g_value(spec, before, phi)});
        } else {
            state = scsc_step(std::move(state), spec, xi, phi, cfg.y_floor);
        }
    }
    return state;
}

ModelParams gd_train(ModelParams params, const LossSpec& spec, std::span<const ChannelSample> dataset,
                     std::int64_t iters, double alpha, std::vector<GdRecord>* trace) {
    if (dataset.empty()) throw DomainError("gd_train: empty dataset");
    const auto batch = as_batch(dataset);
    for (std::int64_t k = 0; k <= iters; ++k) {
        const bool last = k == iters;
        if (last && !trace) break;
        const auto obj = full_objective(spec, params, batch);
        if (!std::isfinite(obj.value))
            throw DivergenceError("gd_train: objective became non-finite at step " + std::to_string(k) +
                                  "; try a smaller alpha");
        if (trace) trace->push_back({k, obj.value, sq_norm(obj.grad)});
        if (last) break;
        for (std::size_t i = 0; i < params.values.size(); ++i) params.values[i] -= alpha * obj.grad[i];
    }
    check_finite(params.values, "gd_train");
    return params;
}

ModelParams sgd_train(ModelParams params, const LossSpec& spec, std::span<const ChannelSample> dataset,
                      std::int64_t epochs, std::size_t minibatch, double alpha, Rng& rng) {
    if (epochs <= 0) return params;
    if (dataset.empty()) throw DomainError("sgd_train: empty dataset");
    if (minibatch == 0) throw ConfigError("sgd_train: minibatch must be positive");

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Batch batch;
    for (std::int64_t e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += minibatch) {
            const std::size_t end = std::min(order.size(), start + minibatch);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset[order[i]]);
            const auto loss = mean_upper(spec, params, batch);
            if (!std::isfinite(loss.value))
                throw DivergenceError("sgd_train: loss became non-finite; try a smaller alpha");
            for (std::size_t i = 0; i < params.values.size(); ++i) params.values[i] -= alpha * loss.grad[i];
        }
    }
    check_finite(params.values, "sgd_train");
    return params;
}

DualWeights DualWeights::uniform(std::size_t n) {
    return DualWeights{std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0)};
}

void DualWeights::validate(double tol) const {
    double total = 0.0;
    for (double l : lambda) {
        if (!(l >= 0.0)) throw DomainError("dual weights must be nonnegative");
        total += l;
    }
    if (!(std::abs(total - 1.0) <= tol))
        throw DomainError("dual weights sum to " + std::to_string(total) + ", not 1");
}

namespace {

// lambda_i <- lambda_i exp(step_i) / Z, evaluated in the log domain.
void exponentiated_ascent(std::vector<double>& lambda, const std::vector<double>& step) {
    std::vector<double> logw(lambda.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        logw[i] = lambda[i] > 0.0 ? std::log(lambda[i]) + step[i] : -std::numeric_limits<double>::infinity();
        m = std::max(m, logw[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) total += (lambda[i] = std::exp(logw[i] - m));
    for (auto& l : lambda) l /= total;
}

}  // namespace

GdaResult gda_train(ModelParams params, DualWeights dual, const LossSpec& spec, std::span<const ChannelSample> dataset,
                    std::int64_t iters, double alpha_theta, double alpha_lambda, std::size_t minibatch, Rng* rng) {
    if (dataset.empty()) throw DomainError("gda_train: empty dataset");
    if (dual.lambda.size() != dataset.size()) throw ShapeError("dual weights do not match the dataset size");
    dual.validate();
    if (!(alpha_lambda > alpha_theta)) throw ConfigError("gda_train needs alpha_lambda > alpha_theta");
    if (minibatch > 0 && !rng) throw ConfigError("gda_train: minibatch mode needs an rng");

    const std::size_t n = dataset.size();
    const auto full = as_batch(dataset);
    std::vector<double> step(n);
    std::vector<double> weights;
    std::vector<std::size_t> drawn;

    for (std::int64_t k = 0; k < iters; ++k) {
        std::fill(step.begin(), step.end(), 0.0);
        std::vector<double> grad;
        if (minibatch == 0) {
            auto wl = weighted_upper(spec, params, full, dual.lambda);
            for (std::size_t i = 0; i < n; ++i) step[i] = alpha_lambda * wl.per_sample[i];
            grad = std::move(wl.grad);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            drawn.resize(minibatch);
            Batch b(minibatch);
            weights.resize(minibatch);
            const double scale = static_cast<double>(n) / static_cast<double>(minibatch);
            for (std::size_t j = 0; j < minibatch; ++j) {
                drawn[j] = pick(*rng);
                b[j] = &dataset[drawn[j]];
                weights[j] = scale * dual.lambda[drawn[j]];
            }
            auto wl = weighted_upper(spec, params, b, weights);
            // Centre the sampled losses on their mean: exponentiated ascent ignores a
            // common shift, and without it the hit counts alone spread lambda.
            const double base =
                std::accumulate(wl.per_sample.begin(), wl.per_sample.end(), 0.0) / static_cast<double>(minibatch);
            for (std::size_t j = 0; j < minibatch; ++j)
                step[drawn[j]] += alpha_lambda * scale * (wl.per_sample[j] - base);
            grad = std::move(wl.grad);
        }
        for (std::size_t i = 0; i < params.values.size(); ++i) params.values[i] -= alpha_theta * grad[i];
        exponentiated_ascent(dual.lambda, step);
    }
    check_finite(params.values, "gda_train");
    return {std::move(params), std::move(dual)};
}

ScscObserver make_trace_writer(std::ostream& out, const LossSpec& spec, std::span<const ChannelSample> pool) {
    out << "step,F,grad_norm,y,tracking_error\n";
    auto batch = std::make_shared<Batch>(as_batch(pool));
    return [&out, spec, batch](const ScscStepInfo& info) {
        const auto obj = full_objective(spec, *info.params, *batch);
        const double g_full = g_value(spec, *info.params, *batch);
        const double err = (g_full - info.y_next) * (g_full - info.y_next);
        out << info.step << ',' << obj.value << ',' << std::sqrt(sq_norm(obj.grad)) << ',' << info.y_next << ','
            << err << '\n';
    };
}

}  // namespace wcl
