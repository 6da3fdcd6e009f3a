#pragma once

#include <array>
#include <cstdint>

namespace isac {

/// Named sub-streams so that different consumers keyed by the same
/// (seed, trial) never share random numbers.
enum class Stream : std::uint32_t {
    symbols = 0,
    scenario = 1,
    direction = 2,
    misc = 3,
};

/// Philox4x32-10 counter-based generator. The key is the 64-bit master seed;
/// the counter is (trial index, stream, block). Every (seed, trial, stream)
/// triple is an independent stream that can be regenerated on any thread.
class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t seed, std::uint64_t trial, Stream stream = Stream::symbols);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()();

    /// Uniform integer in [0, bound) without modulo bias. bound >= 1.
    std::uint32_t uniform_index(std::uint32_t bound);
    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();

    static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

} // namespace isac
