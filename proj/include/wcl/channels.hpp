#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace wcl {

using Rng = std::mt19937_64;

/// One network snapshot of K transmitter/receiver pairs.
///
/// h_re/h_im hold the K x K channel row-major: entry (k, j) is the channel from
/// transmitter j to receiver k. p_label and rbar are filled in by WMMSE labelling.
struct ChannelSample {
    std::size_t k_pairs = 0;
    std::vector<double> h_re;
    std::vector<double> h_im;
    std::vector<double> p_label;  // empty when unlabelled
    std::optional<double> rbar;
    int episode_id = 0;

    std::complex<double> h(std::size_t k, std::size_t j) const {
        return {h_re[k * k_pairs + j], h_im[k * k_pairs + j]};
    }
    /// |h_kj|^2, row-major.
    std::vector<double> gains() const;
    bool labelled() const { return !p_label.empty() && rbar.has_value(); }

    friend bool operator==(const ChannelSample&, const ChannelSample&) = default;
};

enum class Distribution { Rayleigh, Rician, Geometry };

struct EpisodeSpec {
    Distribution distribution = Distribution::Rayleigh;
    double area_side_m = 0.0;  // Geometry only
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_batches = 1;

    friend bool operator==(const EpisodeSpec&, const EpisodeSpec&) = default;
};

const char* to_string(Distribution d);
Distribution distribution_from_string(const std::string& name);

std::vector<ChannelSample> gen_rayleigh(std::size_t k_pairs, std::size_t n, Rng& rng);
std::vector<ChannelSample> gen_rician(std::size_t k_pairs, std::size_t n, Rng& rng);
std::vector<ChannelSample> gen_geometry(std::size_t k_pairs, std::size_t n, double area_side_m, Rng& rng);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Applies the pathloss |h_kj|^2 = |f_kj|^2 / (1 + d_kj^2) to a small-scale fading
/// matrix, d_kj being the distance from transmitter j to receiver k. The phase of
/// each entry is kept.
ChannelSample geometry_channel(std::span<const Point> tx, std::span<const Point> rx,
                               std::span<const std::complex<double>> fading);

/// Streaming episodes. Train batches are exposed as plain sample spans; which
/// episode a batch came from is bookkeeping for evaluation only.
class EpisodeStream {
public:
    EpisodeStream() = default;
    EpisodeStream(std::size_t k_pairs, std::vector<EpisodeSpec> specs,
                  std::vector<std::vector<ChannelSample>> batches, std::vector<int> batch_episodes,
                  std::vector<std::vector<ChannelSample>> test_sets);

    std::size_t k_pairs() const { return k_pairs_; }
    const std::vector<EpisodeSpec>& specs() const { return specs_; }
    std::size_t batch_count() const { return batches_.size(); }
    std::span<const ChannelSample> batch(std::size_t t) const { return batches_.at(t); }
    const std::vector<std::vector<ChannelSample>>& test_sets() const { return test_sets_; }

    int batch_episode(std::size_t t) const { return batch_episodes_.at(t); }

    /// Mutable access used for labelling.
    template <typename Fn>
    void for_each_sample(Fn&& fn) {
        for (auto& b : batches_)
            for (auto& s : b) fn(s);
        for (auto& ts : test_sets_)
            for (auto& s : ts) fn(s);
    }

    friend bool operator==(const EpisodeStream&, const EpisodeStream&) = default;

private:
    std::size_t k_pairs_ = 0;
    std::vector<EpisodeSpec> specs_;
    std::vector<std::vector<ChannelSample>> batches_;
    std::vector<int> batch_episodes_;
    std::vector<std::vector<ChannelSample>> test_sets_;
};

/// Generates every episode in order (train then test per episode) from one rng.
/// Throws ConfigError when specs is empty or n_train is not divisible by n_batches.
EpisodeStream build_stream(std::size_t k_pairs, const std::vector<EpisodeSpec>& specs, Rng& rng);

}  // namespace wcl
