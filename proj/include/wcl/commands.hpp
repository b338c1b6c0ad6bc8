#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace wcl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct GenOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out;
};

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> out_dir;
    std::string methods;  // comma-separated; empty = every method in the config
    std::optional<std::uint64_t> seed;
    bool parallel = false;
};

struct EvalOptions {
    std::optional<std::filesystem::path> checkpoint;
    std::filesystem::path dataset;
    std::string policy = "network";  // network | wmmse | max | zero
    std::filesystem::path histogram_out = "histogram.csv";
    double bin_width = 0.1;
};

/// Generates the stream described by the config, labels it with WMMSE and
/// writes the dataset file.
int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the selected methods over a dataset. Writes metrics_<method>.csv,
/// model_<method>.json and memory_<method>.jsonl into the output directory.
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Evaluates a checkpoint (or a reference policy) on the dataset's test sets and
/// writes the rate-ratio histogram.
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wcl
