#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracle.hpp"
#include "wcl/errors.hpp"
#include "wcl/model.hpp"

using namespace wcl;

namespace {

double dot_output(const ModelParams& params, std::span<const double> x, std::span<const double> upstream) {
    const auto trace = forward(params, x);
    const auto out = trace.output();
    return std::inner_product(out.begin(), out.end(), upstream.begin(), 0.0);
}

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// Sets every output bias (the last K values) to b.
void set_output_bias(ModelParams& p, double b) {
    const std::size_t k = p.output_size();
    for (std::size_t i = p.values.size() - k; i < p.values.size(); ++i) p.values[i] = b;
}

}  // namespace

TEST_CASE("features are channel magnitudes") {
    ChannelSample s;
    s.k_pairs = 2;
    s.h_re = {1, 0, 0, 1};
    s.h_im = {0, 0, 0, 0};
    CHECK(features(s) == std::vector<double>{1, 0, 0, 1});
    s.h_re[1] = 3.0;
    s.h_im[1] = 4.0;
    CHECK(features(s)[1] == 5.0);
    CHECK(features(s) == features(s));
}

TEST_CASE("init") {
    Rng rng(1);
    const auto p = init_params({4, 2}, 1.0, rng);
    CHECK(p.values.size() == 10);
    const double a = std::sqrt(6.0 / 6.0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(p.values[i]) < a);
    CHECK(p.values[8] == 0.0);
    CHECK(p.values[9] == 0.0);

    Rng r1(5), r2(5);
    CHECK(init_params({9, 20, 8, 3}, 1.0, r1) == init_params({9, 20, 8, 3}, 1.0, r2));
    CHECK(param_count(std::vector<std::size_t>{9, 20, 8, 3}) == 10 * 20 + 21 * 8 + 9 * 3);
}

TEST_CASE("forward") {
    SUBCASE("zero parameters give half power") {
        ModelParams p{{4, 3, 2}, std::vector<double>(param_count(std::vector<std::size_t>{4, 3, 2}), 0.0), 2.0};
        const std::vector<double> x{0.3, 1.0, 2.0, 0.1};
        const auto t = forward(p, x);
        for (double o : t.output()) CHECK(o == 1.0);
    }
    SUBCASE("saturated output bias") {
        Rng rng(2);
        auto p = init_params({4, 5, 2}, 1.0, rng);
        set_output_bias(p, 40.0);
        const std::vector<double> x{0.1, 0.2, 0.3, 0.4};
        const auto t = forward(p, x);
        for (double o : t.output()) CHECK(std::abs(o - 1.0) <= 1e-6);
    }
    SUBCASE("outputs stay inside the power box") {
        Rng rng(3);
        const auto p = init_params({9, 16, 3}, 0.5, rng);
        for (int i = 0; i < 50; ++i) {
            const auto x = random_vec(9, rng, 0.0, 3.0);
            const auto t = forward(p, x);
            for (double o : t.output()) {
                CHECK(o > 0.0);
                CHECK(o < 0.5);
            }
        }
    }
    SUBCASE("shape mismatch") {
        Rng rng(4);
        const auto p = init_params({4, 2}, 1.0, rng);
        const std::vector<double> x{1.0, 2.0};
        CHECK_THROWS_AS(forward(p, x), ShapeError);
    }
}

TEST_CASE("backward") {
    Rng rng(6);
    const auto p = init_params({4, 5, 2}, 1.0, rng);
    const auto x = random_vec(4, rng, 0.0, 2.0);
    const auto trace = forward(p, x);

    SUBCASE("zero upstream") {
        const std::vector<double> zero{0.0, 0.0};
        for (double g : backward(p, trace, zero)) CHECK(g == 0.0);
    }
    SUBCASE("linear in the upstream vector") {
        const auto up = random_vec(2, rng);
        std::vector<double> twice{2.0 * up[0], 2.0 * up[1]};
        const auto g1 = backward(p, trace, up);
        const auto g2 = backward(p, trace, twice);
        for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g2[i] == doctest::Approx(2.0 * g1[i]).epsilon(1e-14));
    }
    SUBCASE("matches finite differences on random tiny nets") {
        for (int trial = 0; trial < 50; ++trial) {
            auto q = init_params({4, 5, 2}, 1.0, rng);
            for (auto& v : q.values) v += 0.1 * random_vec(1, rng)[0];  // nonzero biases
            const auto xx = random_vec(4, rng, 0.0, 2.0);
            const auto up = random_vec(2, rng);
            const auto g = backward(q, forward(q, xx), up);
            const auto fd = testing::param_diff(q, [&](const ModelParams& m) { return dot_output(m, xx, up); });
            CHECK(testing::rel_error(g, fd) <= 1e-4);
        }
    }
    SUBCASE("deeper net") {
        auto q = init_params({9, 7, 6, 3}, 2.0, rng);
        const auto xx = random_vec(9, rng, 0.0, 2.0);
        const auto up = random_vec(3, rng);
        const auto g = backward(q, forward(q, xx), up);
        const auto fd = testing::param_diff(q, [&](const ModelParams& m) { return dot_output(m, xx, up); });
        CHECK(testing::rel_error(g, fd) <= 1e-4);
    }
    SUBCASE("trace from another architecture is rejected") {
        Rng r(1);
        const auto other = init_params({4, 3, 2}, 1.0, r);
        const std::vector<double> up{1.0, 1.0};
        CHECK_THROWS_AS(backward(other, trace, up), ShapeError);
    }
}

TEST_CASE("checkpoint round trip") {
    Rng rng(12);
    auto p = init_params({9, 11, 3}, 1.0, rng);
    for (auto& v : p.values) v += 1e-3 / 7.0;
    const auto dir = testing::temp_dir("model");
    save_checkpoint(p, dir / "ck.json");
    CHECK(load_checkpoint(dir / "ck.json") == p);
}
