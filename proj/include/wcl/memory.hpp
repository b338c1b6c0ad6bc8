#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wcl/channels.hpp"

namespace wcl {

enum class MemoryStrategy { BilevelTopM, Reservoir, JointUnbounded, NoMemory };

const char* to_string(MemoryStrategy s);

/// Replay memory holding at most `capacity` samples (unbounded for JointUnbounded,
/// always empty for NoMemory).
class MemoryBuffer {
public:
    MemoryBuffer(MemoryStrategy strategy, std::size_t capacity);

    MemoryStrategy strategy() const { return strategy_; }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t seen_count() const { return seen_; }
    const std::vector<ChannelSample>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }

    /// Keeps the samples of pool with the largest scores (lower-level losses u, or
    /// any monotone transform of them such as softmax weights). Pool order is kept.
    void update_bilevel(std::span<const ChannelSample> pool, std::span<const double> scores);

    /// Classic reservoir: the first `capacity` samples are stored, sample number t
    /// (1-based) afterwards replaces a uniform slot with probability capacity / t.
    void update_reservoir(std::span<const ChannelSample> new_batch, Rng& rng);

    /// Appends everything.
    void update_joint(std::span<const ChannelSample> new_batch);

private:
    MemoryStrategy strategy_;
    std::size_t capacity_;
    std::vector<ChannelSample> items_;
    std::uint64_t seen_ = 0;
};

/// Indices of the m largest scores, ties broken by the smaller index, returned
/// in increasing index order. Returns every index when m >= scores.size().
std::vector<std::size_t> select_top_m(std::span<const double> scores, std::size_t m);

/// One reservoir offer; `seen` counts items offered so far, including this one.
template <typename T>
void reservoir_offer(std::vector<T>& slots, std::size_t capacity, std::uint64_t seen, const T& item, Rng& rng) {
    if (capacity == 0) return;
    if (slots.size() < capacity) {
        slots.push_back(item);
        return;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, seen - 1);
    const std::uint64_t j = pick(rng);
    if (j < capacity) slots[static_cast<std::size_t>(j)] = item;
}

}  // namespace wcl
