#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "wcl/errors.hpp"
#include "wcl/wsr.hpp"

using namespace wcl;

namespace {

RateProblem unit_problem(std::size_t k, std::vector<double> gains, double p_max = 1.0) {
    return make_problem(k, std::move(gains), std::vector<double>(k, 1.0), std::vector<double>(k, 1.0), p_max);
}

RateProblem random_problem(std::size_t k, Rng& rng) {
    auto s = gen_rayleigh(k, 1, rng).front();
    return make_problem(s, SystemParams{});
}

std::vector<double> random_power(std::size_t k, Rng& rng) {
    std::uniform_real_distribution<double> u(0.01, 0.99);
    std::vector<double> p(k);
    for (auto& x : p) x = u(rng);
    return p;
}

}  // namespace

TEST_CASE("sum_rate closed forms") {
    const std::vector<double> ones{1.0, 1.0};
    CHECK(sum_rate(unit_problem(2, {1, 0, 0, 1}), ones) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(sum_rate(unit_problem(2, {1, 1, 1, 1}), ones) == doctest::Approx(2.0 * std::log(1.5)).epsilon(1e-15));
    const std::vector<double> zero{0.0};
    CHECK(sum_rate(unit_problem(1, {1}), zero) == 0.0);
}

TEST_CASE("sum_rate domain checks") {
    const auto prob = unit_problem(2, {1, 0, 0, 1});
    const std::vector<double> high{1.5, 0.2};
    const std::vector<double> neg{-0.1, 0.2};
    CHECK_THROWS_AS(sum_rate(prob, high), DomainError);
    CHECK_THROWS_AS(sum_rate(prob, neg), DomainError);
    CHECK_THROWS_AS(grad_sum_rate(prob, high), DomainError);
    CHECK_THROWS_AS(make_problem(1, {-1.0}, {1.0}, {1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(make_problem(1, {1.0}, {0.0}, {1.0}, 1.0), DomainError);
    CHECK_THROWS_AS(make_problem(1, {1.0}, {1.0}, {0.0}, 1.0), DomainError);
}

TEST_CASE("grad_sum_rate") {
    SUBCASE("single link") {
        const std::vector<double> p{1.0};
        CHECK(grad_sum_rate(unit_problem(1, {1}), p)[0] == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("decoupled links") {
        const auto prob = unit_problem(2, {2.0, 0.0, 0.0, 3.0});
        const std::vector<double> p{0.4, 0.7};
        const auto g = grad_sum_rate(prob, p);
        CHECK(g[0] == doctest::Approx(2.0 / (1.0 + 2.0 * 0.4)).epsilon(1e-14));
        CHECK(g[1] == doctest::Approx(3.0 / (1.0 + 3.0 * 0.7)).epsilon(1e-14));
    }
    SUBCASE("matches central differences on random instances") {
        Rng rng(42);
        for (std::size_t k : {2u, 5u, 10u}) {
            for (int trial = 0; trial < 100; ++trial) {
                const auto prob = random_problem(k, rng);
                const auto p = random_power(k, rng);
                const auto fd = testing::central_diff([&](std::span<const double> q) { return sum_rate(prob, q); }, p,
                                                      1e-5);
                CHECK(testing::rel_error(grad_sum_rate(prob, p), fd) <= 1e-6);
            }
        }
    }
}

TEST_CASE("sum_rate SINR invariance under row scaling") {
    Rng rng(8);
    std::uniform_real_distribution<double> c(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 4;
        auto prob = random_problem(k, rng);
        const auto p = random_power(k, rng);
        const double before = sum_rate(prob, p);
        for (std::size_t r = 0; r < k; ++r) {
            const double s = c(rng);
            for (std::size_t j = 0; j < k; ++j) prob.gains[r * k + j] *= s * s;
            prob.noise[r] *= s * s;
        }
        CHECK(sum_rate(prob, p) == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("wmmse") {
    SUBCASE("single user uses full power") {
        const auto sol = wmmse(unit_problem(1, {0.3}, 2.0));
        CHECK(sol.p[0] == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("decoupled links use full power") {
        const auto sol = wmmse(unit_problem(2, {0.5, 0.0, 0.0, 2.0}));
        CHECK(sol.p[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(sol.p[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("feasible, self-consistent and never worse than full power") {
        Rng rng(3);
        for (std::size_t k : {2u, 3u, 5u, 10u}) {
            for (int trial = 0; trial < 50; ++trial) {
                const auto prob = random_problem(k, rng);
                const auto sol = wmmse(prob);
                for (double x : sol.p) {
                    CHECK(x >= 0.0);
                    CHECK(x <= prob.p_max);
                }
                CHECK(sol.rate == sum_rate(prob, sol.p));
                CHECK(sol.rate >= sum_rate(prob, std::vector<double>(k, prob.p_max)) - 1e-9);
            }
        }
    }
    SUBCASE("returns a KKT point of the box-constrained problem") {
        // Full-power start makes the all-on corner a trap whenever both partials
        // are positive there; stationarity is what the iteration guarantees.
        Rng rng(2024);
        for (std::size_t k : {2u, 3u, 5u}) {
            for (int trial = 0; trial < 50; ++trial) {
                const auto prob = random_problem(k, rng);
                const auto sol = wmmse(prob, 5000, 1e-12);
                const auto g = grad_sum_rate(prob, sol.p);
                for (std::size_t i = 0; i < k; ++i) {
                    if (sol.p[i] >= prob.p_max - 1e-9)
                        CHECK(g[i] >= -1e-3);
                    else if (sol.p[i] <= 1e-9)
                        CHECK(g[i] <= 1e-3);
                    else
                        CHECK(std::abs(g[i]) <= 1e-3);
                }
            }
        }
    }
}

TEST_CASE("brute_force_opt") {
    SUBCASE("single user") {
        const auto sol = brute_force_opt(unit_problem(1, {0.7}), 11);
        CHECK(sol.p[0] == 1.0);
    }
    SUBCASE("no interference") {
        const auto sol = brute_force_opt(unit_problem(2, {1, 0, 0, 1}), 11);
        CHECK(sol.p == std::vector<double>{1.0, 1.0});
    }
    SUBCASE("strong interference turns one link off") {
        const auto sol = brute_force_opt(unit_problem(2, {1, 100, 100, 1}), 201);
        CHECK((sol.p[0] == 0.0 || sol.p[1] == 0.0));
    }
    SUBCASE("K > 3 is refused") {
        CHECK_THROWS_AS(brute_force_opt(unit_problem(4, std::vector<double>(16, 1.0)), 3), CapabilityError);
    }
    SUBCASE("dominates wmmse up to grid resolution") {
        Rng rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            const auto prob = random_problem(2, rng);
            const auto grid = brute_force_opt(prob, 101);
            const auto sol = wmmse(prob);
            // a 1/100 step moves each SINR term by at most |grad| * 0.01
            const auto g = grad_sum_rate(prob, sol.p);
            const double slack = 0.01 * (std::abs(g[0]) + std::abs(g[1])) + 1e-4;
            CHECK(grid.rate >= sol.rate - slack);
        }
    }
}
