#include "wcl/wsr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wcl/errors.hpp"

namespace wcl {

namespace {

void check_power(const RateProblem& prob, std::span<const double> p) {
    if (p.size() != prob.k)
        throw ShapeError("power vector has length " + std::to_string(p.size()) + ", expected " +
                         std::to_string(prob.k));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= prob.p_max))
            throw DomainError("p[" + std::to_string(i) + "] = " + std::to_string(p[i]) + " outside [0, p_max]");
    }
}

// Received power sum_j |h_kj|^2 p_j + sigma_k^2 at every receiver.
std::vector<double> total_received(const RateProblem& prob, std::span<const double> p) {
    std::vector<double> tot(prob.k);
    for (std::size_t r = 0; r < prob.k; ++r) {
        double acc = prob.noise[r];
        for (std::size_t j = 0; j < prob.k; ++j) acc += prob.gain(r, j) * p[j];
        tot[r] = acc;
    }
    return tot;
}

}  // namespace

RateProblem make_problem(std::size_t k, std::vector<double> gains, std::vector<double> weights,
                         std::vector<double> noise, double p_max) {
    if (k == 0) throw ShapeError("RateProblem needs K >= 1");
    if (gains.size() != k * k || weights.size() != k || noise.size() != k)
        throw ShapeError("RateProblem field sizes do not match K");
    for (double g : gains)
        if (!std::isfinite(g) || g < 0.0) throw DomainError("channel gains must be finite and nonnegative");
    for (double w : weights)
        if (!(w > 0.0)) throw DomainError("link weights must be positive");
    for (double s : noise)
        if (!(s > 0.0)) throw DomainError("noise powers must be positive");
    if (!(p_max > 0.0)) throw DomainError("p_max must be positive");
    return RateProblem{k, std::move(gains), std::move(weights), std::move(noise), p_max};
}

RateProblem make_problem(const ChannelSample& sample, const SystemParams& sys) {
    const std::size_t k = sample.k_pairs;
    return make_problem(k, sample.gains(), std::vector<double>(k, sys.weight), std::vector<double>(k, sys.noise),
                        sys.p_max);
}

double sum_rate(const RateProblem& prob, std::span<const double> p) {
    check_power(prob, p);
    double rate = 0.0;
    for (std::size_t r = 0; r < prob.k; ++r) {
        double interference = prob.noise[r];
        for (std::size_t j = 0; j < prob.k; ++j)
            if (j != r) interference += prob.gain(r, j) * p[j];
        rate += prob.weights[r] * std::log1p(prob.gain(r, r) * p[r] / interference);
    }
    return rate;
}

std::vector<double> grad_sum_rate(const RateProblem& prob, std::span<const double> p) {
    check_power(prob, p);
    const auto tot = total_received(prob, p);
    std::vector<double> interf(prob.k);
    for (std::size_t r = 0; r < prob.k; ++r) {
        interf[r] = prob.noise[r];
        for (std::size_t j = 0; j < prob.k; ++j)
            if (j != r) interf[r] += prob.gain(r, j) * p[j];
    }

    std::vector<double> grad(prob.k);
    for (std::size_t k = 0; k < prob.k; ++k) {
        double g = prob.weights[k] * prob.gain(k, k) / tot[k];
        for (std::size_t j = 0; j < prob.k; ++j) {
            if (j == k) continue;
            g -= prob.weights[j] * prob.gain(j, j) * p[j] * prob.gain(j, k) / (interf[j] * tot[j]);
        }
        grad[k] = g;
    }
    return grad;
}

PowerSolution wmmse(const RateProblem& prob, int max_iters, double tol) {
    const std::size_t n = prob.k;
    const double v_max = std::sqrt(prob.p_max);
    std::vector<double> amp(n);
    for (std::size_t k = 0; k < n; ++k) amp[k] = std::sqrt(prob.gain(k, k));

    std::vector<double> v(n, v_max), u(n), w(n), p(n);
    auto update_uw = [&] {
        for (std::size_t k = 0; k < n; ++k) {
            double rx = prob.noise[k];
            for (std::size_t j = 0; j < n; ++j) rx += prob.gain(k, j) * v[j] * v[j];
            u[k] = amp[k] * v[k] / rx;
            // 1 - u h v = noise-plus-interference / total; stays > 0 since noise > 0.
            w[k] = 1.0 / (1.0 - u[k] * amp[k] * v[k]);
        }
    };
    auto powers = [&] {
        for (std::size_t k = 0; k < n; ++k) p[k] = std::min(v[k] * v[k], prob.p_max);
    };

    update_uw();
    powers();
    PowerSolution best{p, sum_rate(prob, p)};
    double prev = best.rate;

    for (int it = 0; it < max_iters; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            double denom = 0.0;
            for (std::size_t j = 0; j < n; ++j) denom += prob.weights[j] * w[j] * u[j] * u[j] * prob.gain(j, k);
            const double num = prob.weights[k] * w[k] * u[k] * amp[k];
            v[k] = denom > 0.0 ? std::clamp(num / denom, 0.0, v_max) : (num > 0.0 ? v_max : 0.0);
        }
        update_uw();
        powers();
        const double rate = sum_rate(prob, p);
        if (rate > best.rate) best = {p, rate};
        if (std::abs(rate - prev) < tol) break;
        prev = rate;
    }
    return best;
}

PowerSolution brute_force_opt(const RateProblem& prob, std::size_t grid_points_per_dim) {
    if (prob.k > 3)
        throw CapabilityError("brute_force_opt supports K <= 3, got K = " + std::to_string(prob.k));
    if (grid_points_per_dim < 2) throw DomainError("grid needs at least two points per dimension");

    const std::size_t n = prob.k;
    const std::size_t steps = grid_points_per_dim - 1;
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> p(n);
    PowerSolution best{std::vector<double>(n, 0.0), -1.0};
    while (true) {
        for (std::size_t k = 0; k < n; ++k)
            p[k] = idx[k] == steps ? prob.p_max : prob.p_max * static_cast<double>(idx[k]) / static_cast<double>(steps);
        const double r = sum_rate(prob, p);
        if (r > best.rate) best = {p, r};

        std::size_t d = 0;
        while (d < n && ++idx[d] > steps) idx[d++] = 0;
        if (d == n) break;
    }
    return best;
}

}  // namespace wcl
