#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shortrace/race_config.hpp"
#include "shortrace/rng.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace {

enum class EstimateMethod { MonteCarlo, GaussianFormula, SieveEmpirical };
std::string to_string(EstimateMethod method);

struct DensityEstimate {
    double p_hat = 0.0;
    double std_err = 0.0;
    std::uint64_t n = 0;
    EstimateMethod method = EstimateMethod::MonteCarlo;
};

// Bernoulli estimate from `hits` successes in n trials.
DensityEstimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n, EstimateMethod method);

using Event = std::function<bool(std::span<const double>)>;

struct ModelOptions {
    // Zeros with gamma <= height get explicit random phases. Defaults to the whole table.
    std::optional<double> height;
    // When set, zeros in (height, table_height] and the expected contribution of
    // all zeros above table_height (zero density log(t/2pi)/2pi) enter as one
    // Gaussian vector with the matching covariance.
    bool gaussian_tail = false;
    std::optional<double> table_height;
    unsigned threads = 1;
};

// X_j = Re(2 sum_{gamma > 0} w_j(rho) U_gamma) with one phase per zero shared by
// all coordinates. Draw i is a pure function of (seed, i): the phases of
// zeros 4m .. 4m+3 are the four 32-bit words of Philox block (stream m,
// counter i), read as multiples of 2 pi / 2^32.
class RandomModel {
public:
    RandomModel(const RaceConfig& config, const ZeroTable& zeros, const ModelOptions& options = {});

    const RaceConfig& config() const noexcept { return config_; }
    std::size_t r() const noexcept { return config_.r(); }
    std::size_t explicit_zero_count() const noexcept { return gammas_; }
    double height() const noexcept { return height_; }
    double table_height() const noexcept { return table_height_; }
    bool gaussian_tail() const noexcept { return gaussian_tail_; }
    const std::string& source_id() const noexcept { return source_id_; }
    unsigned threads() const noexcept { return threads_; }

    // Covariance of the explicit part, of the Gaussian part, and their sum.
    const Eigen::MatrixXd& explicit_covariance() const noexcept { return explicit_cov_; }
    const Eigen::MatrixXd& tail_covariance() const noexcept { return tail_cov_; }
    Eigen::MatrixXd covariance() const { return explicit_cov_ + tail_cov_; }
    std::span<const double> variances() const noexcept { return variances_; }

    // Writes draw `index` into out (size r).
    void draw(const CounterRng& rng, std::uint64_t index, std::span<double> out) const;

    // Fourier transform of the model law: prod_gamma J0(2|sum_j w_j xi_j|) times
    // exp(-xi' S xi / 2) for the Gaussian part S.
    double char_fn(std::span<const double> xi) const;

private:
    RaceConfig config_;
    std::string source_id_;
    double height_ = 0.0;
    double table_height_ = 0.0;
    bool gaussian_tail_ = false;
    unsigned threads_ = 1;
    std::size_t gammas_ = 0;
    std::vector<double> coeff_;  // per zero, r pairs (2 Re w_j, -2 Im w_j)
    Eigen::MatrixXd explicit_cov_;
    Eigen::MatrixXd tail_cov_;
    Eigen::MatrixXd tail_factor_;  // lower Cholesky factor of tail_cov_
    std::vector<double> variances_;
};

struct SampleBatch {
    RaceConfig config;
    std::uint64_t n = 0;
    std::vector<double> draws;  // row-major n x r
    std::uint64_t seed = 0;
    double truncation_height = 0.0;
    bool gaussian_tail = false;
    std::string source_id;
    std::vector<double> variances;  // model V_j used for normalization

    std::size_t r() const noexcept { return config.r(); }
    std::span<const double> row(std::uint64_t i) const { return {draws.data() + i * r(), r()}; }
};

SampleBatch sample(const RandomModel& model, std::uint64_t n, std::uint64_t seed);

// Events see normalized rows X_j / sqrt(V_j) unless normalized = false.
DensityEstimate estimate_event(const SampleBatch& batch, const Event& event, bool normalized = true);

// Streaming versions: draws are generated chunk by chunk and never stored.
// Hit counts are integers, so results do not depend on the thread count.
DensityEstimate estimate_event(const RandomModel& model, std::uint64_t n, std::uint64_t seed, const Event& event,
                               bool normalized = true);
DensityEstimate estimate_ordering(const RandomModel& model, std::uint64_t n, std::uint64_t seed);
DensityEstimate estimate_top_s_ordering(const RandomModel& model, std::size_t s, std::uint64_t n,
                                        std::uint64_t seed);

// Counts several events over one stream of draws.
std::vector<DensityEstimate> estimate_events(const RandomModel& model, std::uint64_t n, std::uint64_t seed,
                                             std::span<const Event> events, bool normalized = true);

Event ordering_event(std::size_t r);
Event top_s_event(std::size_t r, std::size_t s);

struct SampleMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd mean_std_err;
    Eigen::MatrixXd covariance;  // E[X_j X_k] - mean_j mean_k
    Eigen::MatrixXd covariance_std_err;
};

SampleMoments sample_moments(const SampleBatch& batch);

// prod over 0 < gamma <= height of J0(2 |sum_j w_j(rho) xi_j|).
double char_fn(const RaceConfig& config, const ZeroTable& zeros, double height, std::span<const double> xi);

struct CharFnEstimate {
    double mean = 0.0;  // MC mean of cos<X, xi>
    double std_err = 0.0;
};

CharFnEstimate mc_char_fn(const SampleBatch& batch, std::span<const double> xi);

struct TailBoundCheck {
    double radius = 0.0;
    double p_hat = 0.0;
    double std_err = 0.0;
    double bound = 0.0;  // 2r exp(-R^2 / (4 delta log(1/delta)))
    bool ok = false;     // p_hat - 3 std_err <= bound
};

double tail_bound(std::size_t r, double delta, double radius);

// P(max_j |X_j| > R) on raw draws. Requires R > sqrt(delta log(1/delta)).
TailBoundCheck tail_bound_check(const SampleBatch& batch, double radius);

}  // namespace shortrace
