#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shortrace/covariance.hpp"
#include "shortrace/race_config.hpp"

namespace shortrace {

// Half-open (lo, hi]; infinite endpoints allowed.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct GaussianPrediction {
    double value = 0.0;  // leading + correction
    double leading = 0.0;
    double correction = 0.0;  // the 1/log(1/delta) term
    std::string remainder_order = "O(log^-2(1/delta))";
};

double normal_cdf(double x);
double normal_quantile(double p);

struct BoxOptions {
    double target_std_err = 1e-4;
    std::uint64_t max_pairs = std::uint64_t{1} << 24;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct BoxEstimate {
    double value = 0.0;
    double std_err = 0.0;
    std::uint64_t pairs = 0;
};

// N(0, C) measure of the box. Sequential conditioning on the Cholesky factor
// (Genz) with antithetic uniforms; rounds of fixed size until the standard
// error reaches the target, so the result does not depend on threads.
BoxEstimate box_probability(const Eigen::MatrixXd& c, std::span<const Interval> box, const BoxOptions& options = {});

// Correlation built from the asymptotic covariance (delta <= 0.1).
CorrelationMatrix asymptotic_correlation(const RaceConfig& config);

// Product of N(0,1) box probabilities minus
// (1/(2 pi log 1/delta)) sum_{j<k} Delta(|t_j - t_k|) g_j g_k prod_{i != j,k} P_i
// with g = e^{-lo^2/2} - e^{-hi^2/2}. Requires r <= 8.
GaussianPrediction negcorr_expansion(const RaceConfig& config, std::span<const Interval> box);

// E[X_(i) X_(l)] for the order statistics of r iid N(0,1), ranks counted
// from the largest (1-based), i != l.
double order_statistic_product(std::size_t r, std::size_t i, std::size_t l);

// Density of x_{order[0]} > x_{order[1]} > ... > x_{order[r-1]}; an empty
// order means x_1 > ... > x_r. Requires r <= 6.
GaussianPrediction ordering_prediction(const RaceConfig& config, std::span<const std::size_t> order = {});

// Density of x_{prefix[0]} > ... > x_{prefix[s-1]} > every other coordinate.
GaussianPrediction top_s_prediction(const RaceConfig& config, std::span<const std::size_t> prefix);

// P(|x| > radius) for x ~ N(0, I_r); the first-order correction vanishes.
GaussianPrediction large_deviation_prediction(std::size_t r, double radius);

struct DensityComparison {
    double exact = 0.0;   // N(0, C) density
    double approx = 0.0;  // (2 pi)^{-r/2} exp(-|x|^2/2 + sum_{j<k} c_jk x_j x_k)
    double ratio = 0.0;   // approx / exact
};

DensityComparison density_comparison(const Eigen::MatrixXd& c, std::span<const double> x);

}  // namespace shortrace
