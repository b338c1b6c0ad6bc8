#include "wcl/channels.hpp"

#include <cmath>
#include <string>

#include "wcl/errors.hpp"

namespace wcl {

namespace {

void check_args(std::size_t k_pairs, std::size_t n) {
    if (k_pairs == 0) throw ConfigError("k_pairs must be >= 1");
    if (n == 0) throw ConfigError("sample count must be >= 1");
}

ChannelSample empty_sample(std::size_t k) {
    ChannelSample s;
    s.k_pairs = k;
    s.h_re.resize(k * k);
    s.h_im.resize(k * k);
    return s;
}

}  // namespace

std::vector<double> ChannelSample::gains() const {
    std::vector<double> g(h_re.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = h_re[i] * h_re[i] + h_im[i] * h_im[i];
    return g;
}

const char* to_string(Distribution d) {
    switch (d) {
        case Distribution::Rayleigh: return "rayleigh";
        case Distribution::Rician: return "rician";
        case Distribution::Geometry: return "geometry";
    }
    return "?";
}

Distribution distribution_from_string(const std::string& name) {
    if (name == "rayleigh") return Distribution::Rayleigh;
    if (name == "rician") return Distribution::Rician;
    if (name == "geometry") return Distribution::Geometry;
    throw ConfigError("unknown distribution '" + name + "' (expected rayleigh, rician or geometry)");
}

std::vector<ChannelSample> gen_rayleigh(std::size_t k_pairs, std::size_t n, Rng& rng) {
    check_args(k_pairs, n);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(2.0);
    std::vector<ChannelSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = empty_sample(k_pairs);
        for (std::size_t e = 0; e < k_pairs * k_pairs; ++e) {
            s.h_re[e] = normal(rng) * scale;
            s.h_im[e] = normal(rng) * scale;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ChannelSample> gen_rician(std::size_t k_pairs, std::size_t n, Rng& rng) {
    check_args(k_pairs, n);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<ChannelSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = empty_sample(k_pairs);
        for (std::size_t e = 0; e < k_pairs * k_pairs; ++e) {
            s.h_re[e] = (1.0 + normal(rng)) / 2.0;
            s.h_im[e] = (1.0 + normal(rng)) / 2.0;
        }
        out.push_back(std::move(s));
    }
    return out;
}

ChannelSample geometry_channel(std::span<const Point> tx, std::span<const Point> rx,
                               std::span<const std::complex<double>> fading) {
    const std::size_t k = tx.size();
    if (rx.size() != k || fading.size() != k * k)
        throw ShapeError("geometry_channel: expected K tx, K rx and K*K fading entries");
    auto s = empty_sample(k);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t t = 0; t < k; ++t) {
            const double dx = rx[r].x - tx[t].x;
            const double dy = rx[r].y - tx[t].y;
            const double atten = 1.0 / std::sqrt(1.0 + dx * dx + dy * dy);
            const auto f = fading[r * k + t];
            s.h_re[r * k + t] = f.real() * atten;
            s.h_im[r * k + t] = f.imag() * atten;
        }
    }
    return s;
}

std::vector<ChannelSample> gen_geometry(std::size_t k_pairs, std::size_t n, double area_side_m, Rng& rng) {
    check_args(k_pairs, n);
    if (!(area_side_m > 0.0)) throw ConfigError("area_side_m must be positive");
    std::uniform_real_distribution<double> pos(0.0, area_side_m);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(2.0);

    std::vector<ChannelSample> out;
    out.reserve(n);
    std::vector<Point> tx(k_pairs), rx(k_pairs);
    std::vector<std::complex<double>> fading(k_pairs * k_pairs);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& p : tx) p = {pos(rng), pos(rng)};
        for (auto& p : rx) p = {pos(rng), pos(rng)};
        for (auto& f : fading) {
            const double re = normal(rng) * scale;
            const double im = normal(rng) * scale;
            f = {re, im};
        }
        out.push_back(geometry_channel(tx, rx, fading));
    }
    return out;
}

EpisodeStream::EpisodeStream(std::size_t k_pairs, std::vector<EpisodeSpec> specs,
                             std::vector<std::vector<ChannelSample>> batches, std::vector<int> batch_episodes,
                             std::vector<std::vector<ChannelSample>> test_sets)
    : k_pairs_(k_pairs),
      specs_(std::move(specs)),
      batches_(std::move(batches)),
      batch_episodes_(std::move(batch_episodes)),
      test_sets_(std::move(test_sets)) {
    if (batches_.size() != batch_episodes_.size())
        throw ShapeError("EpisodeStream: batch/episode tag count mismatch");
}

EpisodeStream build_stream(std::size_t k_pairs, const std::vector<EpisodeSpec>& specs, Rng& rng) {
    if (specs.empty()) throw ConfigError("episode list is empty");
    for (std::size_t e = 0; e < specs.size(); ++e) {
        const auto& s = specs[e];
        const std::string where = "episodes[" + std::to_string(e) + "]";
        if (s.n_batches == 0) throw ConfigError(where + ".n_batches must be positive");
        if (s.n_train == 0) throw ConfigError(where + ".n_train must be positive");
        if (s.n_test == 0) throw ConfigError(where + ".n_test must be positive");
        if (s.n_train % s.n_batches != 0)
            throw ConfigError(where + ".n_train (" + std::to_string(s.n_train) +
                              ") is not divisible by n_batches (" + std::to_string(s.n_batches) + ")");
        if (s.distribution == Distribution::Geometry && !(s.area_side_m > 0.0))
            throw ConfigError(where + ".area_side_m must be positive for geometry");
    }

    std::vector<std::vector<ChannelSample>> batches;
    std::vector<int> batch_episodes;
    std::vector<std::vector<ChannelSample>> test_sets;
    for (std::size_t e = 0; e < specs.size(); ++e) {
        const auto& s = specs[e];
        auto generate = [&](std::size_t n) {
            switch (s.distribution) {
                case Distribution::Rayleigh: return gen_rayleigh(k_pairs, n, rng);
                case Distribution::Rician: return gen_rician(k_pairs, n, rng);
                case Distribution::Geometry: return gen_geometry(k_pairs, n, s.area_side_m, rng);
            }
            return std::vector<ChannelSample>{};
        };
        auto train = generate(s.n_train);
        auto test = generate(s.n_test);
        for (auto& x : train) x.episode_id = static_cast<int>(e);
        for (auto& x : test) x.episode_id = static_cast<int>(e);

        const std::size_t per = s.n_train / s.n_batches;
        for (std::size_t b = 0; b < s.n_batches; ++b) {
            batches.emplace_back(std::make_move_iterator(train.begin() + b * per),
                                 std::make_move_iterator(train.begin() + (b + 1) * per));
            batch_episodes.push_back(static_cast<int>(e));
        }
        test_sets.push_back(std::move(test));
    }
    return EpisodeStream(k_pairs, specs, std::move(batches), std::move(batch_episodes), std::move(test_sets));
}

}  // namespace wcl
