#pragma once

// Test-only reference computations. Nothing here calls into backward() or the
// analytic gradient code it is used to check.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wcl/channels.hpp"
#include "wcl/dataset_io.hpp"
#include "wcl/model.hpp"
#include "wcl/wsr.hpp"

namespace wcl::testing {

/// Central differences of f at x with step h, one coordinate at a time.
inline std::vector<double> central_diff(const std::function<double(std::span<const double>)>& f,
                                        std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double up = f(x);
        x[i] = orig - h;
        const double down = f(x);
        x[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Gradient of a scalar function of the flat parameter vector.
inline std::vector<double> param_diff(const ModelParams& params, const std::function<double(const ModelParams&)>& f,
                                      double h = 1e-5) {
    ModelParams probe = params;
    return central_diff(
        [&](std::span<const double> v) {
            std::copy(v.begin(), v.end(), probe.values.begin());
            return f(probe);
        },
        params.values, h);
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double rel_error(std::span<const double> a, std::span<const double> b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

/// Rayleigh samples with WMMSE labels.
inline std::vector<ChannelSample> labelled_rayleigh(std::size_t k, std::size_t n, Rng& rng,
                                                    const SystemParams& sys = {}) {
    auto samples = gen_rayleigh(k, n, rng);
    for (auto& s : samples) {
        auto sol = wmmse(make_problem(s, sys), 500, 1e-6);
        s.p_label = sol.p;
        s.rbar = sol.rate;
    }
    return samples;
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::path(WCL_TEST_TMPDIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace wcl::testing
