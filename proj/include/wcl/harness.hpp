#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wcl/channels.hpp"
#include "wcl/model.hpp"
#include "wcl/objective.hpp"
#include "wcl/trainer.hpp"
#include "wcl/wsr.hpp"

namespace wcl {

enum class Method { TL, Reservoir, Bilevel, Minimax, JointEqual, JointWeighted };

inline constexpr Method kAllMethods[] = {Method::TL,      Method::Reservoir,  Method::Bilevel,
                                         Method::Minimax, Method::JointEqual, Method::JointWeighted};

const char* to_string(Method m);
/// Case-sensitive; throws ConfigError listing the valid names.
Method method_from_string(const std::string& name);

/// Inner-loop settings shared by all strategies. SGD-based methods run `epochs`
/// passes over their training set; SCSC and GDA run the same number of
/// minibatch iterations (epochs * ceil(|train set| / minibatch)) unless
/// scsc_iters / gda_iters override it.
struct InnerConfig {
    std::int64_t epochs = 20;
    std::size_t minibatch = 32;
    double sgd_alpha = 0.05;
    ScscConfig scsc{};
    std::int64_t scsc_iters = 0;
    double gda_alpha_theta = 0.05;
    double gda_alpha_lambda = 0.5;
    std::int64_t gda_iters = 0;
};

struct StrategyConfig {
    Method method = Method::Bilevel;
    std::size_t memory_capacity = 200;
    InnerConfig inner{};
    LossSpec loss{};
    bool record_wall_time = true;
};

struct MetricsRow {
    std::size_t seen_samples = 0;
    Method method = Method::TL;
    std::vector<double> per_episode_rate;
    std::vector<double> per_episode_ratio;
    double avg_rate = 0.0;
    std::int64_t wall_ms = 0;

    double avg_ratio() const;
};

struct RunResult {
    std::vector<MetricsRow> rows;
    ModelParams params;
    std::vector<ChannelSample> memory;
};

/// Anything that maps a channel sample to a feasible power vector.
using Policy = std::function<std::vector<double>(const ChannelSample&)>;

Policy network_policy(ModelParams params);
Policy wmmse_policy(SystemParams sys, int max_iters = 500, double tol = 1e-6);
Policy constant_policy(double power);

struct Evaluation {
    std::vector<double> per_episode_rate;
    std::vector<double> per_episode_ratio;
};

/// Mean sum-rate and mean rate / rbar on each test set. Throws MissingLabelError
/// when a test sample has no rbar.
Evaluation evaluate(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                    const SystemParams& sys);

/// Per-sample rate ratios pooled over all test sets.
std::vector<double> rate_ratios(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                                const SystemParams& sys);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

/// Bins [i*w, (i+1)*w) from 0 up to the largest ratio.
std::vector<HistogramBin> ratio_histogram(const Policy& policy, const std::vector<std::vector<ChannelSample>>& test_sets,
                                          const SystemParams& sys, double bin_width);

/// Observer invoked after every round with the freshly appended row.
using RoundObserver = std::function<void(const MetricsRow&)>;

/// The continual loop: on every batch D_t assemble the method's training set,
/// train from the previous parameters, update the memory, evaluate on every
/// episode's test set. seed drives all training randomness.
RunResult run_continual(const EpisodeStream& stream, const StrategyConfig& cfg, ModelParams init, std::uint64_t seed,
                        const RoundObserver& on_round = {});

/// Same loop over an explicit list of train batches (used by fixtures that need
/// hand-built or empty batches).
RunResult run_continual(std::span<const std::vector<ChannelSample>> batches,
                        const std::vector<std::vector<ChannelSample>>& test_sets, const StrategyConfig& cfg,
                        ModelParams init, std::uint64_t seed, const RoundObserver& on_round = {});

void write_metrics_header(std::ostream& out, std::size_t n_episodes);
void write_metrics_row(std::ostream& out, const MetricsRow& row);
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);

}  // namespace wcl
