#include "shortrace/random_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shortrace/bessel.hpp"
#include "shortrace/covariance.hpp"
#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/phasor.hpp"
#include "shortrace/summation.hpp"
#include "shortrace/weights.hpp"

namespace shortrace {

namespace {

constexpr std::size_t kMaxDim = 32;
constexpr std::uint64_t kDrawChunk = 1 << 14;
constexpr std::uint64_t kTailStream = std::uint64_t{1} << 63;

std::uint64_t chunk_count(std::uint64_t n) { return (n + kDrawChunk - 1) / kDrawChunk; }

}  // namespace

std::string to_string(EstimateMethod method) {
    switch (method) {
        case EstimateMethod::MonteCarlo: return "monte-carlo";
        case EstimateMethod::GaussianFormula: return "gaussian-formula";
        case EstimateMethod::SieveEmpirical: return "sieve-empirical";
    }
    return "unknown";
}

DensityEstimate bernoulli_estimate(std::uint64_t hits, std::uint64_t n, EstimateMethod method) {
    if (n == 0) throw ValidationError("estimate: no samples");
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n, method};
}

RandomModel::RandomModel(const RaceConfig& config, const ZeroTable& zeros, const ModelOptions& options)
    : config_(config), source_id_(zeros.source_id()), threads_(options.threads) {
    if (config_.r() > kMaxDim) throw ValidationError("random model supports at most 32 coordinates");
    height_ = options.height.value_or(zeros.max_height());
    if (!(height_ > 0.0)) throw ValidationError("random model: height must be positive");
    if (!zeros.covers(height_)) {
        std::ostringstream msg;
        msg << "random model: height " << height_ << " exceeds zero table '" << zeros.source_id() << "' (max "
            << zeros.max_height() << ")";
        throw CoverageError(msg.str());
    }
    const auto gammas = zeros.up_to(height_);
    gammas_ = gammas.size();
    const std::size_t r = config_.r();
    coeff_.resize(gammas_ * 2 * r);
    for (std::size_t n = 0; n < gammas_; ++n) {
        for (std::size_t j = 0; j < r; ++j) {
            const auto w = weight_at_zero(gammas[n], config_.delta(), config_.shift(j));
            coeff_[(n * r + j) * 2] = 2.0 * w.real();
            coeff_[(n * r + j) * 2 + 1] = -2.0 * w.imag();
        }
    }
    explicit_cov_ = covariance_sum(config_, gammas, threads_);
    tail_cov_ = Eigen::MatrixXd::Zero(r, r);
    table_height_ = height_;

    gaussian_tail_ = options.gaussian_tail;
    if (gaussian_tail_) {
        table_height_ = options.table_height.value_or(zeros.max_height());
        if (table_height_ < height_ || !zeros.covers(table_height_))
            throw CoverageError("random model: table height must lie between height and the table end");
        const auto all = zeros.up_to(table_height_);
        tail_cov_ = covariance_sum(config_, all.subspan(gammas_), threads_) +
                    covariance_tail_integral(config_, table_height_);
        Eigen::LLT<Eigen::MatrixXd> llt(tail_cov_);
        if (llt.info() != Eigen::Success) throw ValidationError("random model: tail covariance is not positive definite");
        tail_factor_ = llt.matrixL();
    }
    const Eigen::MatrixXd total = covariance();
    variances_.resize(r);
    for (std::size_t j = 0; j < r; ++j) variances_[j] = total(j, j);
}

void RandomModel::draw(const CounterRng& rng, std::uint64_t index, std::span<double> out) const {
    const std::size_t r = config_.r();
    std::array<CompensatedSum, kMaxDim> acc{};
    const auto& phasor = UnitPhasor::instance();
    const double* c = coeff_.data();
    std::uint32_t u[16];
    for (std::size_t n = 0; n < gammas_; n += 16) {
        rng.words_block(n / 4, index, u);
        const std::size_t block = std::min<std::size_t>(16, gammas_ - n);
        for (std::size_t h = 0; h < block; ++h) {
            const auto [cs, sn] = phasor(u[h]);
            for (std::size_t j = 0; j < r; ++j, c += 2) acc[j].add(c[0] * cs + c[1] * sn);
        }
    }
    for (std::size_t j = 0; j < r; ++j) out[j] = acc[j].value();
    if (gaussian_tail_) {
        std::array<double, kMaxDim + 1> z{};
        for (std::size_t m = 0; 2 * m < r; ++m) {
            const auto g = rng.normal_pair(kTailStream + m, index);
            z[2 * m] = g[0];
            z[2 * m + 1] = g[1];
        }
        for (std::size_t j = 0; j < r; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += tail_factor_(j, k) * z[k];
            out[j] += s;
        }
    }
}

double RandomModel::char_fn(std::span<const double> xi) const {
    const std::size_t r = config_.r();
    if (xi.size() != r) throw ValidationError("char_fn: xi must have r entries");
    double product = 1.0;
    const double* c = coeff_.data();
    for (std::size_t n = 0; n < gammas_; ++n) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t j = 0; j < r; ++j, c += 2) {
            re += c[0] * xi[j];
            im += c[1] * xi[j];
        }
        // c holds 2w, so |2 sum w_j xi_j| = hypot(re, im)
        product *= bessel_j0(std::hypot(re, im));
    }
    if (gaussian_tail_) {
        const Eigen::Map<const Eigen::VectorXd> v(xi.data(), static_cast<Eigen::Index>(r));
        product *= std::exp(-0.5 * v.dot(tail_cov_ * v));
    }
    return product;
}

SampleBatch sample(const RandomModel& model, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("sample: n must be >= 1");
    const std::size_t r = model.r();
    SampleBatch batch{model.config(), n, std::vector<double>(n * r), seed, model.height(), model.gaussian_tail(),
                      model.source_id(), std::vector<double>(model.variances().begin(), model.variances().end())};
    const CounterRng rng(seed);
    for_each_chunk(chunk_count(n), model.threads(), [&](std::size_t c) {
        const std::uint64_t end = std::min<std::uint64_t>(n, (c + 1) * kDrawChunk);
        for (std::uint64_t i = c * kDrawChunk; i < end; ++i) model.draw(rng, i, {batch.draws.data() + i * r, r});
    });
    return batch;
}

namespace {

std::vector<double> inverse_sd(std::span<const double> variances) {
    std::vector<double> out(variances.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 1.0 / std::sqrt(variances[j]);
    return out;
}

}  // namespace

DensityEstimate estimate_event(const SampleBatch& batch, const Event& event, bool normalized) {
    const std::size_t r = batch.r();
    const auto scale = inverse_sd(batch.variances);
    std::vector<double> row(r);
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < batch.n; ++i) {
        const auto raw = batch.row(i);
        for (std::size_t j = 0; j < r; ++j) row[j] = normalized ? raw[j] * scale[j] : raw[j];
        hits += event(row) ? 1 : 0;
    }
    return bernoulli_estimate(hits, batch.n, EstimateMethod::MonteCarlo);
}

std::vector<DensityEstimate> estimate_events(const RandomModel& model, std::uint64_t n, std::uint64_t seed,
                                             std::span<const Event> events, bool normalized) {
    if (n == 0) throw ValidationError("estimate: n must be >= 1");
    const std::size_t r = model.r();
    const auto scale = inverse_sd(model.variances());
    const CounterRng rng(seed);
    const std::uint64_t chunks = chunk_count(n);
    std::vector<std::uint64_t> hits(chunks * events.size(), 0);
    for_each_chunk(chunks, model.threads(), [&](std::size_t c) {
        std::vector<double> x(r);
        const std::uint64_t end = std::min<std::uint64_t>(n, (c + 1) * kDrawChunk);
        for (std::uint64_t i = c * kDrawChunk; i < end; ++i) {
            model.draw(rng, i, x);
            if (normalized)
                for (std::size_t j = 0; j < r; ++j) x[j] *= scale[j];
            for (std::size_t e = 0; e < events.size(); ++e) hits[c * events.size() + e] += events[e](x) ? 1 : 0;
        }
    });
    std::vector<DensityEstimate> out;
    for (std::size_t e = 0; e < events.size(); ++e) {
        std::uint64_t total = 0;
        for (std::uint64_t c = 0; c < chunks; ++c) total += hits[c * events.size() + e];
        out.push_back(bernoulli_estimate(total, n, EstimateMethod::MonteCarlo));
    }
    return out;
}

DensityEstimate estimate_event(const RandomModel& model, std::uint64_t n, std::uint64_t seed, const Event& event,
                               bool normalized) {
    return estimate_events(model, n, seed, std::span<const Event>(&event, 1), normalized).front();
}

Event ordering_event(std::size_t r) {
    return [r](std::span<const double> x) {
        for (std::size_t j = 1; j < r; ++j)
            if (!(x[j - 1] > x[j])) return false;
        return true;
    };
}

Event top_s_event(std::size_t r, std::size_t s) {
    if (s < 1 || s > r) throw ValidationError("top-s ordering: need 1 <= s <= r");
    return [r, s](std::span<const double> x) {
        for (std::size_t j = 1; j < s; ++j)
            if (!(x[j - 1] > x[j])) return false;
        for (std::size_t j = s; j < r; ++j)
            if (!(x[s - 1] > x[j])) return false;
        return true;
    };
}

DensityEstimate estimate_ordering(const RandomModel& model, std::uint64_t n, std::uint64_t seed) {
    if (model.r() < 2) throw ValidationError("ordering: need r >= 2");
    return estimate_event(model, n, seed, ordering_event(model.r()));
}

DensityEstimate estimate_top_s_ordering(const RandomModel& model, std::size_t s, std::uint64_t n,
                                        std::uint64_t seed) {
    return estimate_event(model, n, seed, top_s_event(model.r(), s));
}

SampleMoments sample_moments(const SampleBatch& batch) {
    const std::size_t r = batch.r();
    const double n = static_cast<double>(batch.n);
    if (batch.n < 2) throw ValidationError("sample_moments: need at least 2 draws");
    SampleMoments out;
    out.mean.resize(r);
    for (std::size_t j = 0; j < r; ++j) {
        CompensatedSum s;
        for (std::uint64_t i = 0; i < batch.n; ++i) s.add(batch.row(i)[j]);
        out.mean(j) = s.value() / n;
    }
    out.covariance.resize(r, r);
    out.covariance_std_err.resize(r, r);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = j; k < r; ++k) {
            CompensatedSum s;
            CompensatedSum s2;
            for (std::uint64_t i = 0; i < batch.n; ++i) {
                const auto row = batch.row(i);
                const double p = (row[j] - out.mean(j)) * (row[k] - out.mean(k));
                s.add(p);
                s2.add(p * p);
            }
            const double m = s.value() / n;
            const double var = std::max(0.0, s2.value() / n - m * m);
            out.covariance(j, k) = out.covariance(k, j) = m;
            out.covariance_std_err(j, k) = out.covariance_std_err(k, j) = std::sqrt(var / n);
        }
    }
    out.mean_std_err.resize(r);
    for (std::size_t j = 0; j < r; ++j) out.mean_std_err(j) = std::sqrt(out.covariance(j, j) / n);
    return out;
}

double char_fn(const RaceConfig& config, const ZeroTable& zeros, double height, std::span<const double> xi) {
    ModelOptions options;
    options.height = height;
    return RandomModel(config, zeros, options).char_fn(xi);
}

CharFnEstimate mc_char_fn(const SampleBatch& batch, std::span<const double> xi) {
    const std::size_t r = batch.r();
    if (xi.size() != r) throw ValidationError("mc_char_fn: xi must have r entries");
    CompensatedSum s;
    CompensatedSum s2;
    for (std::uint64_t i = 0; i < batch.n; ++i) {
        const auto row = batch.row(i);
        double dot = 0.0;
        for (std::size_t j = 0; j < r; ++j) dot += row[j] * xi[j];
        const double c = std::cos(dot);
        s.add(c);
        s2.add(c * c);
    }
    const double n = static_cast<double>(batch.n);
    const double mean = s.value() / n;
    return {mean, std::sqrt(std::max(0.0, s2.value() / n - mean * mean) / n)};
}

double tail_bound(std::size_t r, double delta, double radius) {
    return 2.0 * static_cast<double>(r) * std::exp(-radius * radius / (4.0 * delta * std::log(1.0 / delta)));
}

TailBoundCheck tail_bound_check(const SampleBatch& batch, double radius) {
    const double delta = batch.config.delta();
    if (!(radius > std::sqrt(delta * std::log(1.0 / delta))))
        throw ValidationError("tail_bound_check: need R > sqrt(delta log(1/delta))");
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < batch.n; ++i) {
        const auto row = batch.row(i);
        bool out = false;
        for (const double x : row) out = out || std::fabs(x) > radius;
        hits += out ? 1 : 0;
    }
    const auto est = bernoulli_estimate(hits, batch.n, EstimateMethod::MonteCarlo);
    TailBoundCheck check{radius, est.p_hat, est.std_err, tail_bound(batch.r(), delta, radius), false};
    check.ok = check.p_hat - 3.0 * check.std_err <= check.bound;
    return check;
}

}  // namespace shortrace
