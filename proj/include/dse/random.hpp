#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace dse {

/// Seeded random stream. Identical (seed, stream_id) pairs yield identical
/// draw sequences on every platform: the engine is std::mt19937_64, and every
/// derived variate (uniform, normal, bounded integer, shuffle) is computed
/// here rather than through the implementation-defined std distributions.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1); never returns zero.
    double uniform_open();
    /// Standard normal via Box-Muller (consumes two uniforms per call).
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    template<class T>
    void shuffle(std::span<T> items)
    {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Independent child stream; does not advance this stream.
    Rng substream(std::uint64_t stream_id) const { return Rng(seed_, stream_id); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace dse
