#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace faircut {

/// Deterministic random stream built on mt19937_64.
///
/// Every derived quantity (uniform doubles, bounded integers, normals) is
/// computed here rather than through <random> distributions, whose outputs
/// differ between standard libraries. Streams for independent workers come
/// from `derive`, never from sharing one engine.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream for sub-task `index` of a job seeded with `seed`.
    static RandomStream derive(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound). `bound` must be positive.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Standard normal draw (Marsaglia polar method, one value per call).
    double normal();

    /// Moves a uniform random subset of size `k` to the front of `items`
    /// (partial Fisher-Yates).
    template <typename T>
    void choose_front(std::span<T> items, std::size_t k) {
        if (k > items.size())
            k = items.size();
        for (std::size_t i = 0; i < k; ++i) {
            auto j = i + static_cast<std::size_t>(uniform_index(items.size() - i));
            std::swap(items[i], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate (seed, index) pairs.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace faircut
