#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace shortrace {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as
// 1, 2, 3"). Counter-based: the output is a pure function of
// (key, counter), so any draw can be regenerated independently of how
// work is split across threads.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

    // Four independent blocks in lockstep; same output as four generate() calls.
    // The rounds of one block form a dependency chain, so interleaving
    // blocks is what keeps the multipliers busy.
    static void generate4(std::array<Counter, 4>& ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            for (auto& c : ctr) {
                const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
                const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
                c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ key[0], static_cast<std::uint32_t>(p1),
                     static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            }
        }
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Addressable uniform stream: uniform(stream, counter) in [0, 1).
// For the random phase model, stream = zero index and counter = draw index.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    std::array<double, 2> uniform_pair(std::uint64_t stream, std::uint64_t counter) const noexcept {
        const auto out = Philox4x32::generate(
            {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
             static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
            key_);
        const std::uint64_t a = (std::uint64_t{out[0]} << 32) | out[1];
        const std::uint64_t b = (std::uint64_t{out[2]} << 32) | out[3];
        return {to_unit(a), to_unit(b)};
    }

    // uniform_pair for streams stream0 .. stream0+3 at one counter, written as
    // out[2i], out[2i+1] for stream0 + i.
    void uniform_block(std::uint64_t stream0, std::uint64_t counter, double* out) const noexcept {
        std::array<Philox4x32::Counter, 4> ctr;
        for (std::uint64_t i = 0; i < 4; ++i) {
            const std::uint64_t stream = stream0 + i;
            ctr[i] = {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        }
        Philox4x32::generate4(ctr, key_);
        for (std::size_t i = 0; i < 4; ++i) {
            out[2 * i] = to_unit((std::uint64_t{ctr[i][0]} << 32) | ctr[i][1]);
            out[2 * i + 1] = to_unit((std::uint64_t{ctr[i][2]} << 32) | ctr[i][3]);
        }
    }

    // Raw 32-bit words of blocks stream0 .. stream0+3: out[4i .. 4i+3] for stream0 + i.
    void words_block(std::uint64_t stream0, std::uint64_t counter, std::uint32_t* out) const noexcept {
        std::array<Philox4x32::Counter, 4> ctr;
        for (std::uint64_t i = 0; i < 4; ++i) {
            const std::uint64_t stream = stream0 + i;
            ctr[i] = {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        }
        Philox4x32::generate4(ctr, key_);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k) out[4 * i + k] = ctr[i][k];
    }

    double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
        return uniform_pair(stream, counter)[0];
    }

    // Two independent standard normals by Box-Muller.
    std::array<double, 2> normal_pair(std::uint64_t stream, std::uint64_t counter) const noexcept {
        const auto u = uniform_pair(stream, counter);
        const double radius = std::sqrt(-2.0 * std::log1p(-u[0]));
        const double angle = 2.0 * std::numbers::pi * u[1];
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    static double to_unit(std::uint64_t bits) noexcept {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    Philox4x32::Key key_;
};

}  // namespace shortrace
