#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wcl/channels.hpp"
#include "wcl/harness.hpp"
#include "wcl/objective.hpp"
#include "wcl/wsr.hpp"

namespace wcl {

/// Everything an experiment needs. Unset fields fall back to the reference
/// setup (K = 10, four episodes of 20000 train / 1000 test samples in batches of
/// 5000, memory of 2000) divided by `scale`.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    double scale = 10.0;
    std::size_t k_pairs = 10;
    SystemParams system;
    std::vector<EpisodeSpec> episodes;
    std::vector<std::size_t> hidden{200, 80};
    std::vector<StrategyConfig> methods;
    std::filesystem::path output_dir = "out";

    std::vector<std::size_t> layer_sizes() const;
};

/// Parses a JSON config document. Unknown keys and invalid values raise
/// ConfigError naming the offending field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Per-method training seed derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, Method method);

}  // namespace wcl
