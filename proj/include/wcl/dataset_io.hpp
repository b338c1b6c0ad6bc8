#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "wcl/channels.hpp"
#include "wcl/wsr.hpp"

namespace wcl {

inline constexpr int kDatasetVersion = 1;

struct Dataset {
    EpisodeStream stream;
    SystemParams system;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Runs WMMSE on every train and test sample and stores p_label and rbar.
void attach_wmmse_labels(EpisodeStream& stream, const SystemParams& sys, int max_iters = 500, double tol = 1e-6);

/// JSON lines: one header {version, k, p_max, noise, specs}, then per episode its
/// train records followed by its test records.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
void write_dataset(const Dataset& data, std::ostream& out);

/// Throws IoError, FormatError (line and field named) or SchemaError.
Dataset load_dataset(const std::filesystem::path& path);
Dataset read_dataset(std::istream& in);

/// Sample records without a header, e.g. for dumping a replay memory.
void write_samples(std::span<const ChannelSample> samples, std::ostream& out);

}  // namespace wcl
