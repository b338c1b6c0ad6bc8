#include "wcl/harness.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "wcl/errors.hpp"
#include "wcl/memory.hpp"

namespace wcl {

const char* to_string(Method m) {
    switch (m) {
        case Method::TL: return "TL";
        case Method::Reservoir: return "Reservoir";
        case Method::Bilevel: return "Bilevel";
        case Method::Minimax: return "Minimax";
        case Method::JointEqual: return "JointEqual";
        case Method::JointWeighted: return "JointWeighted";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (auto m : kAllMethods)
        if (name == to_string(m)) return m;
    std::string valid;
    for (auto m : kAllMethods) valid += std::string(valid.empty() ? "" : ", ") + to_string(m);
    throw ConfigError("unknown method '" + name + "' (valid: " + valid + ")");
}

double MetricsRow::avg_ratio() const {
    if (per_episode_ratio.empty()) return 0.0;
    return std::accumulate(per_episode_ratio.begin(), per_episode_ratio.end(), 0.0) /
           static_cast<double>(per_episode_ratio.size());
}

Policy network_policy(ModelParams params) {
    return [params = std::move(params)](const ChannelSample& s) {
        const auto trace = forward(params, features(s));
        const auto out = trace.output();
        return std::vector<double>(out.begin(), out.end());
    };
}

Policy wmmse_policy(SystemParams sys, int max_iters, double tol) {
    return [=](const ChannelSample& s) { return wmmse(make_problem(s, sys), max_iters, tol).p; };
}

Policy constant_policy(double power) {
    return [=](const ChannelSample& s) { return std::vector<double>(s.k_pairs, power); };
}

namespace {

double sample_ratio(double rate, const ChannelSample& s) {
    if (!s.rbar) throw MissingLabelError("evaluation needs rbar on every test sample");
    if (!(*s.rbar > 0.0)) throw DegenerateSampleError("test sample has nonpositive rbar");
    return rate / *s.rbar;
}

}  // namespace

Evaluation evaluate(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                    const SystemParams& sys) {
    Evaluation ev;
    for (const auto& set : test_sets) {
        double rate_sum = 0.0;
        double ratio_sum = 0.0;
        for (const auto& s : set) {
            const double r = sum_rate(make_problem(s, sys), policy(s));
            rate_sum += r;
            ratio_sum += sample_ratio(r, s);
        }
        const double n = set.empty() ? 1.0 : static_cast<double>(set.size());
        ev.per_episode_rate.push_back(rate_sum / n);
        ev.per_episode_ratio.push_back(ratio_sum / n);
    }
    return ev;
}

std::vector<double> rate_ratios(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                                const SystemParams& sys) {
    std::vector<double> out;
    for (const auto& set : test_sets)
        for (const auto& s : set) out.push_back(sample_ratio(sum_rate(make_problem(s, sys), policy(s)), s));
    return out;
}

std::vector<HistogramBin> ratio_histogram(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                                          const SystemParams& sys, double bin_width) {
    if (!(bin_width > 0.0)) throw DomainError("histogram bin width must be positive");
    const auto ratios = rate_ratios(policy, test_sets, sys);
    std::vector<HistogramBin> bins;
    for (double r : ratios) {
        const auto b = static_cast<std::size_t>(std::floor(r / bin_width));
        while (bins.size() <= b) {
            const double lo = static_cast<double>(bins.size()) * bin_width;
            bins.push_back({lo, lo + bin_width, 0});
        }
        ++bins[b].count;
    }
    return bins;
}

namespace {

MemoryStrategy memory_for(Method m) {
    switch (m) {
        case Method::TL: return MemoryStrategy::NoMemory;
        case Method::Reservoir: return MemoryStrategy::Reservoir;
        case Method::Bilevel:
        case Method::Minimax: return MemoryStrategy::BilevelTopM;
        case Method::JointEqual:
        case Method::JointWeighted: return MemoryStrategy::JointUnbounded;
    }
    return MemoryStrategy::NoMemory;
}

std::int64_t minibatch_iters(std::int64_t epochs, std::size_t n, std::size_t minibatch) {
    return epochs * static_cast<std::int64_t>((n + minibatch - 1) / minibatch);
}

}  // namespace

RunResult run_continual(const EpisodeStream& stream, const StrategyConfig& cfg, ModelParams init, std::uint64_t seed,
                        const RoundObserver& on_round) {
    std::vector<std::vector<ChannelSample>> batches;
    batches.reserve(stream.batch_count());
    for (std::size_t t = 0; t < stream.batch_count(); ++t) {
        const auto b = stream.batch(t);
        batches.emplace_back(b.begin(), b.end());
    }
    return run_continual(batches, stream.test_sets(), cfg, std::move(init), seed, on_round);
}

RunResult run_continual(std::span<const std::vector<ChannelSample>> batches,
                        const std::vector<std::vector<ChannelSample>>& test_sets, const StrategyConfig& cfg,
                        ModelParams init, std::uint64_t seed, const RoundObserver& on_round) {
    if (batches.empty()) throw ConfigError("run_continual: empty stream");
    validate(init);
    const auto& inner = cfg.inner;
    if (inner.minibatch == 0 || inner.scsc.minibatch_xi == 0) throw ConfigError("minibatch sizes must be positive");

    LossSpec spec = cfg.loss;
    if (cfg.method == Method::Minimax) spec.lower = LowerLoss::SameAsUpper;
    const SystemParams& sys = spec.system;

    Rng rng(seed);
    TrainerState scsc = make_trainer_state(init, inner.scsc.alpha, inner.scsc.beta, seed);
    ModelParams params = std::move(init);
    MemoryBuffer memory(memory_for(cfg.method), cfg.memory_capacity);

    RunResult result;
    std::size_t seen = 0;
    const auto start = std::chrono::steady_clock::now();
    std::vector<ChannelSample> train;

    for (const auto& batch : batches) {
        seen += batch.size();

        // Training set G_t for this round.
        train.clear();
        switch (cfg.method) {
            case Method::TL:
                train = batch;
                break;
            case Method::Reservoir:
            case Method::Bilevel:
            case Method::Minimax:
                train = memory.items();
                train.insert(train.end(), batch.begin(), batch.end());
                break;
            case Method::JointEqual:
            case Method::JointWeighted:
                memory.update_joint(batch);
                train = memory.items();
                break;
        }

        DualWeights dual;
        if (!train.empty()) {
            switch (cfg.method) {
                case Method::TL:
                case Method::Reservoir:
                case Method::JointEqual:
                    params = sgd_train(std::move(params), spec, train, inner.epochs, inner.minibatch, inner.sgd_alpha,
                                       rng);
                    break;
                case Method::Bilevel:
                case Method::JointWeighted: {
                    const auto iters = inner.scsc_iters > 0
                                           ? inner.scsc_iters
                                           : minibatch_iters(inner.epochs, train.size(), inner.scsc.minibatch_xi);
                    scsc.params = std::move(params);
                    scsc = scsc_train(std::move(scsc), spec, train, iters, inner.scsc);
                    params = scsc.params;
                    break;
                }
                case Method::Minimax: {
                    const auto iters = inner.gda_iters > 0
                                           ? inner.gda_iters
                                           : minibatch_iters(inner.epochs, train.size(), inner.minibatch);
                    auto res = gda_train(std::move(params), DualWeights::uniform(train.size()), spec, train, iters,
                                         inner.gda_alpha_theta, inner.gda_alpha_lambda, inner.minibatch, &rng);
                    params = std::move(res.params);
                    dual = std::move(res.dual);
                    break;
                }
            }
        }

        switch (cfg.method) {
            case Method::Reservoir:
                memory.update_reservoir(batch, rng);
                break;
            case Method::Bilevel:
                memory.update_bilevel(train, lower_values(spec, params, as_batch(train)));
                break;
            case Method::Minimax:
                memory.update_bilevel(train, dual.lambda.empty() ? std::vector<double>(train.size(), 0.0)
                                                                 : dual.lambda);
                break;
            default:
                break;
        }

        const auto ev = evaluate(network_policy(params), test_sets, sys);
        MetricsRow row;
        row.seen_samples = seen;
        row.method = cfg.method;
        row.per_episode_rate = ev.per_episode_rate;
        row.per_episode_ratio = ev.per_episode_ratio;
        row.avg_rate = row.per_episode_rate.empty()
                           ? 0.0
                           : std::accumulate(row.per_episode_rate.begin(), row.per_episode_rate.end(), 0.0) /
                                 static_cast<double>(row.per_episode_rate.size());
        if (cfg.record_wall_time)
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                              .count();
        result.rows.push_back(row);
        if (on_round) on_round(result.rows.back());
    }
    result.params = std::move(params);
    result.memory = memory.items();
    return result;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

void write_metrics_header(std::ostream& out, std::size_t n_episodes) {
    out << "seen,method";
    for (std::size_t e = 0; e < n_episodes; ++e) out << ",ep" << e << "_rate";
    for (std::size_t e = 0; e < n_episodes; ++e) out << ",ep" << e << "_ratio";
    out << ",avg_rate,wall_ms\n";
}

void write_metrics_row(std::ostream& out, const MetricsRow& row) {
    out << row.seen_samples << ',' << to_string(row.method);
    for (double r : row.per_episode_rate) out << ',' << fmt(r);
    for (double r : row.per_episode_ratio) out << ',' << fmt(r);
    out << ',' << fmt(row.avg_rate) << ',' << row.wall_ms << '\n';
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
    out << "bin_lo,bin_hi,count\n";
    for (const auto& b : bins) out << fmt(b.lo) << ',' << fmt(b.hi) << ',' << b.count << '\n';
}

}  // namespace wcl
