#include "wcl/memory.hpp"

#include <algorithm>
#include <numeric>

#include "wcl/errors.hpp"

namespace wcl {

const char* to_string(MemoryStrategy s) {
    switch (s) {
        case MemoryStrategy::BilevelTopM: return "bilevel_top_m";
        case MemoryStrategy::Reservoir: return "reservoir";
        case MemoryStrategy::JointUnbounded: return "joint_unbounded";
        case MemoryStrategy::NoMemory: return "no_memory";
    }
    return "?";
}

MemoryBuffer::MemoryBuffer(MemoryStrategy strategy, std::size_t capacity)
    : strategy_(strategy), capacity_(strategy == MemoryStrategy::NoMemory ? 0 : capacity) {}

std::vector<std::size_t> select_top_m(std::span<const double> scores, std::size_t m) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (m >= idx.size()) return idx;
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m), idx.end(),
                     [&](std::size_t a, std::size_t b) {
                         return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                     });
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void MemoryBuffer::update_bilevel(std::span<const ChannelSample> pool, std::span<const double> scores) {
    if (strategy_ != MemoryStrategy::BilevelTopM) throw ConfigError("update_bilevel on a non-bilevel buffer");
    if (pool.size() != scores.size()) throw ShapeError("update_bilevel: scores do not align with the pool");
    std::vector<ChannelSample> kept;
    const auto idx = select_top_m(scores, capacity_);
    kept.reserve(idx.size());
    for (auto i : idx) kept.push_back(pool[i]);
    items_ = std::move(kept);
    seen_ += pool.size();
}

void MemoryBuffer::update_reservoir(std::span<const ChannelSample> new_batch, Rng& rng) {
    if (strategy_ != MemoryStrategy::Reservoir) throw ConfigError("update_reservoir on a non-reservoir buffer");
    for (const auto& s : new_batch) reservoir_offer(items_, capacity_, ++seen_, s, rng);
}

void MemoryBuffer::update_joint(std::span<const ChannelSample> new_batch) {
    if (strategy_ != MemoryStrategy::JointUnbounded) throw ConfigError("update_joint on a bounded buffer");
    items_.insert(items_.end(), new_batch.begin(), new_batch.end());
    seen_ += new_batch.size();
}

}  // namespace wcl
