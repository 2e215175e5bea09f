#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shortrace/psi_sieve.hpp"
#include "shortrace/race_config.hpp"
#include "shortrace/random_model.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace {

// Normalized deviations of actual primes at log-uniform sample points.
struct EmpiricalDistribution {
    RaceConfig config;
    double x_lo = 0.0;
    double x_hi = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> xs;
    std::vector<double> rows;       // row-major n x r, E_j(x) / sqrt(V_j)
    std::vector<double> variances;  // V_j used for every row
    double variance_height = 0.0;   // zeros up to here enter V
    std::string source_id;

    std::size_t n() const noexcept { return xs.size(); }
    std::size_t r() const noexcept { return config.r(); }
    std::span<const double> row(std::size_t i) const { return {rows.data() + i * r(), r()}; }
    std::vector<double> column(std::size_t j) const;
};

// x_i = exp(u_i), u_i uniform on [log x_lo, log x_hi] from Philox stream 0,
// counter i. V_j = covariance_numeric over the whole zero table. Throws
// BudgetError when x_hi lies beyond the psi table.
EmpiricalDistribution collect(double x_lo, double x_hi, const RaceConfig& config, const PsiTable& psi,
                              const ZeroTable& zeros, std::size_t n, std::uint64_t seed, unsigned threads = 1);

// sup |F_n - Phi| for the given samples.
double ks_statistic(std::span<const double> samples);
// Coordinate j of the distribution; requires n >= 100.
double ks_statistic(const EmpiricalDistribution& dist, std::size_t j);

// Pearson correlation of coordinates j and k.
double empirical_correlation(const EmpiricalDistribution& dist, std::size_t j, std::size_t k);

struct ColumnMoments {
    double mean = 0.0;
    double variance = 0.0;
};
ColumnMoments column_moments(const EmpiricalDistribution& dist, std::size_t j);

// Fraction of rows satisfying the event; requires n >= 100.
DensityEstimate empirical_event_density(const EmpiricalDistribution& dist, const Event& event);

}  // namespace shortrace
