#include <doctest.h>

#include <cmath>
#include <set>

#include "oracle.hpp"
#include "wcl/channels.hpp"
#include "wcl/errors.hpp"

using namespace wcl;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("rayleigh moments") {
    SUBCASE("unit average power") {
        Rng rng(0);
        const auto s = gen_rayleigh(1, 100000, rng);
        std::vector<double> p;
        for (const auto& x : s) p.push_back(x.gains()[0]);
        CHECK(mean(p) >= 0.98);
        CHECK(mean(p) <= 1.02);
    }
    SUBCASE("real part variance 1/2") {
        Rng rng(1);
        const auto s = gen_rayleigh(2, 100000, rng);
        std::vector<double> re;
        for (const auto& x : s) re.push_back(x.h_re[0]);
        CHECK(variance(re) >= 0.49);
        CHECK(variance(re) <= 0.51);
    }
    SUBCASE("shape") {
        Rng rng(7);
        const auto s = gen_rayleigh(3, 4, rng);
        REQUIRE(s.size() == 4);
        for (const auto& x : s) {
            CHECK(x.k_pairs == 3);
            CHECK(x.h_re.size() == 9);
            CHECK(x.h_im.size() == 9);
            CHECK_FALSE(x.labelled());
            for (std::size_t i = 0; i < 9; ++i) CHECK(std::isfinite(std::abs(x.h(i / 3, i % 3))));
        }
    }
}

TEST_CASE("rician moments") {
    Rng rng(0);
    const auto s = gen_rician(1, 100000, rng);
    std::vector<double> re, im;
    for (const auto& x : s) {
        re.push_back(x.h_re[0]);
        im.push_back(x.h_im[0]);
    }
    CHECK(mean(re) >= 0.49);
    CHECK(mean(re) <= 0.51);
    CHECK(variance(im) >= 0.245);
    CHECK(variance(im) <= 0.255);

    Rng rng3(3);
    const auto one = gen_rician(2, 1, rng3);
    REQUIRE(one.size() == 1);
    for (double v : one[0].h_re) CHECK(std::isfinite(v));
}

TEST_CASE("geometry pathloss") {
    SUBCASE("co-located nodes keep the fading unchanged") {
        const std::vector<Point> tx{{3.0, 4.0}, {1.0, 1.0}};
        const std::vector<Point> rx{{3.0, 4.0}, {3.0, 4.0}};
        const std::vector<std::complex<double>> f{{0.3, -0.4}, {1.5, 0.2}, {-0.7, 0.9}, {0.1, 0.1}};
        const auto s = geometry_channel(tx, rx, f);
        // d_00 = 0 exactly: receiver 0 sits on transmitter 0
        CHECK(s.gains()[0] == std::norm(f[0]));
        CHECK(s.h_re[0] == f[0].real());
        CHECK(s.h_im[0] == f[0].imag());
        // d_10 = 0 as well
        CHECK(s.gains()[2] == std::norm(f[2]));
    }
    SUBCASE("attenuation never amplifies and keeps the phase") {
        Rng rng(5);
        std::uniform_real_distribution<double> pos(0.0, 10.0);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<Point> tx(2), rx(2);
        for (auto& p : tx) p = {pos(rng), pos(rng)};
        for (auto& p : rx) p = {pos(rng), pos(rng)};
        std::vector<std::complex<double>> f(4);
        for (auto& x : f) x = {normal(rng), normal(rng)};
        const auto s = geometry_channel(tx, rx, f);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(s.gains()[i] <= std::norm(f[i]));
            CHECK(std::arg(s.h(i / 2, i % 2)) == doctest::Approx(std::arg(f[i])).epsilon(1e-12));
        }
    }
    SUBCASE("large area has much weaker gains than rayleigh") {
        Rng rng(0);
        const auto s = gen_geometry(1, 100000, 50.0, rng);
        std::vector<double> p;
        for (const auto& x : s) p.push_back(x.gains()[0]);
        CHECK(mean(p) < 1.0);
    }
    SUBCASE("small area sample is finite") {
        Rng rng(5);
        const auto s = gen_geometry(2, 1, 10.0, rng);
        for (double v : s[0].h_re) CHECK(std::isfinite(v));
    }
    SUBCASE("invalid area") {
        Rng rng(0);
        CHECK_THROWS_AS(gen_geometry(2, 1, 0.0, rng), ConfigError);
    }
}

TEST_CASE("build_stream slicing") {
    SUBCASE("single episode") {
        Rng rng(1);
        const auto st = build_stream(2, {{Distribution::Rayleigh, 0.0, 100, 10, 4}}, rng);
        REQUIRE(st.batch_count() == 4);
        for (std::size_t t = 0; t < 4; ++t) CHECK(st.batch(t).size() == 25);
        REQUIRE(st.test_sets().size() == 1);
        CHECK(st.test_sets()[0].size() == 10);
    }
    SUBCASE("four episodes at 1/10 scale") {
        Rng rng(2);
        std::vector<EpisodeSpec> specs{{Distribution::Rayleigh, 0.0, 2000, 100, 4},
                                       {Distribution::Rician, 0.0, 2000, 100, 4},
                                       {Distribution::Geometry, 10.0, 2000, 100, 4},
                                       {Distribution::Geometry, 50.0, 2000, 100, 4}};
        const auto st = build_stream(2, specs, rng);
        CHECK(st.batch_count() == 16);
        for (std::size_t t = 0; t < 16; ++t) CHECK(st.batch_episode(t) == static_cast<int>(t / 4));
        CHECK(st.test_sets().size() == 4);
    }
    SUBCASE("deterministic under a fixed seed") {
        std::vector<EpisodeSpec> specs{{Distribution::Rician, 0.0, 40, 5, 2}, {Distribution::Geometry, 10.0, 40, 5, 4}};
        Rng a(9), b(9);
        CHECK(build_stream(3, specs, a) == build_stream(3, specs, b));
    }
    SUBCASE("train and test sets are disjoint") {
        Rng rng(4);
        const auto st = build_stream(2, {{Distribution::Rayleigh, 0.0, 60, 20, 3}}, rng);
        std::set<std::vector<double>> train;
        for (std::size_t t = 0; t < st.batch_count(); ++t)
            for (const auto& s : st.batch(t)) train.insert(s.h_re);
        for (const auto& s : st.test_sets()[0]) CHECK(train.count(s.h_re) == 0);
    }
    SUBCASE("configuration errors") {
        Rng rng(0);
        CHECK_THROWS_AS(build_stream(2, {}, rng), ConfigError);
        CHECK_THROWS_WITH_AS(build_stream(2, {{Distribution::Rayleigh, 0.0, 10, 5, 3}}, rng),
                             doctest::Contains("n_train"), ConfigError);
    }
}
