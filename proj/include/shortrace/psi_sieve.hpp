#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "shortrace/race_config.hpp"

namespace shortrace {

struct SieveOptions {
    std::uint64_t ceiling = 1'000'000'000;  // largest x any query may touch
    std::size_t segment_size = std::size_t{1} << 20;
    unsigned threads = 1;  // 0 = hardware concurrency
};

// Primes <= limit by a plain sieve of Eratosthenes.
std::vector<std::uint32_t> small_primes(std::uint32_t limit);

// Calls visit(n, log p) for every prime power n = p^k in (lo, hi], ascending.
// Memory is O(sqrt(hi) + segment_size). The visiting order, and hence any
// compensated sum built from it, does not depend on segment_size or threads.
void for_each_prime_power(std::uint64_t lo, std::uint64_t hi, const SieveOptions& options,
                          const std::function<void(std::uint64_t, double)>& visit);

// psi(x) = sum of log p over prime powers p^k <= x, streamed through the
// segmented sieve with compensated summation.
double psi_streaming(double x, const SieveOptions& options = {});

struct PsiSegment {
    std::uint64_t begin = 0;  // [begin, end)
    std::uint64_t end = 0;
    double psi_begin = 0.0;  // psi(begin - 1)
    double psi_end = 0.0;    // psi(end - 1)
};

// Cumulative psi over [1, limit], built by one ascending pass. Answers psi(x)
// and interval sums by binary search, so short-interval deviations at many x
// cost one sieve in total.
class PsiTable {
public:
    explicit PsiTable(std::uint64_t limit, const SieveOptions& options = {});

    std::uint64_t limit() const noexcept { return limit_; }
    std::size_t prime_power_count() const noexcept { return positions_.size(); }
    std::span<const PsiSegment> segments() const noexcept { return segments_; }

    double psi(double x) const;

    // psi(b) - psi(a): sum of Lambda(n) over integers a < n <= b.
    double interval_sum(double a, double b) const;

    // E(x; delta, t_j) = (psi(upper) - psi(lower) - delta x) / sqrt(x).
    double deviation(double x, const RaceConfig& config, std::size_t j) const;
    std::vector<double> deviation_vector(double x, const RaceConfig& config) const;

private:
    double psi_at_integer(std::uint64_t n) const;
    void check_range(double x) const;

    std::uint64_t limit_;
    std::vector<std::uint64_t> positions_;
    std::vector<double> cumulative_;
    std::vector<PsiSegment> segments_;
};

}  // namespace shortrace
