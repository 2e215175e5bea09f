#include "shortrace/gaussian_theory.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/rng.hpp"
#include "shortrace/weights.hpp"

namespace shortrace {

namespace {

constexpr std::uint64_t kPairsPerChunk = 4096;
constexpr std::size_t kChunksPerRound = 16;

double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

double gauss_bump(double x) { return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x); }

double interval_mass(const Interval& iv) { return normal_cdf(iv.hi) - normal_cdf(iv.lo); }

void check_box(std::span<const Interval> box, std::size_t r) {
    if (box.size() != r) throw ValidationError("box dimension does not match r");
    for (const auto& iv : box)
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || iv.hi < iv.lo) throw ValidationError("box needs lo <= hi");
}

std::vector<std::size_t> resolve_order(std::size_t r, std::span<const std::size_t> order) {
    std::vector<std::size_t> out(order.begin(), order.end());
    if (out.empty()) {
        out.resize(r);
        std::iota(out.begin(), out.end(), 0);
    }
    if (out.size() != r) throw ValidationError("ordering must list every coordinate once");
    auto sorted = out;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < r; ++i)
        if (sorted[i] != i) throw ValidationError("ordering must be a permutation of 0..r-1");
    return out;
}

double log_inverse_delta(const RaceConfig& config) { return std::log(1.0 / config.delta()); }

// sum_{j<k} Delta(|t_j - t_k|) E[X_(rank j) X_(rank k)] for one full ordering.
double ordering_moment(const RaceConfig& config, std::span<const std::size_t> order) {
    const std::size_t r = config.r();
    std::vector<std::size_t> rank(r);
    for (std::size_t p = 0; p < r; ++p) rank[order[p]] = p + 1;
    double sum = 0.0;
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = j + 1; k < r; ++k)
            sum += delta_repulsion(std::fabs(config.shift(j) - config.shift(k))) *
                   order_statistic_product(r, rank[j], rank[k]);
    return sum;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

BoxEstimate box_probability(const Eigen::MatrixXd& c, std::span<const Interval> box, const BoxOptions& options) {
    const auto r = static_cast<std::size_t>(c.rows());
    if (r == 0 || c.cols() != c.rows()) throw ValidationError("box_probability: C must be square");
    check_box(box, r);
    if (!(options.target_std_err > 0.0)) throw ValidationError("box_probability: target_std_err must be positive");
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw ValidationError("box_probability: C is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    for (std::size_t i = 0; i < r; ++i)
        if (!(l(i, i) > 1e-10 * std::sqrt(c(i, i)))) throw ValidationError("box_probability: C is singular");

    const CounterRng rng(options.seed);
    // One conditioning pass with uniforms u (or 1 - u).
    auto weight_of = [&](const double* u, bool flip, std::vector<double>& y) {
        double f = 1.0;
        for (std::size_t i = 0; i < r; ++i) {
            double shift = 0.0;
            for (std::size_t k = 0; k < i; ++k) shift += l(i, k) * y[k];
            const double d = normal_cdf((box[i].lo - shift) / l(i, i));
            const double e = normal_cdf((box[i].hi - shift) / l(i, i));
            f *= e - d;
            if (f <= 0.0) return 0.0;
            if (i + 1 < r) {
                const double w = flip ? 1.0 - u[i] : u[i];
                const double p = std::clamp(d + w * (e - d), 1e-300, 1.0 - 0x1.0p-53);
                y[i] = normal_quantile(p);
            }
        }
        return f;
    };

    struct Partial {
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    std::uint64_t pairs = 0;
    double sum = 0.0, sum_sq = 0.0;
    while (true) {
        std::vector<Partial> slots(kChunksPerRound);
        const std::uint64_t base = pairs;
        for_each_chunk(kChunksPerRound, options.threads, [&](std::size_t chunk) {
            std::vector<double> u(r + 1), y(r);
            Partial part;
            const std::uint64_t first = base + chunk * kPairsPerChunk;
            for (std::uint64_t n = first; n < first + kPairsPerChunk; ++n) {
                for (std::size_t i = 0; i + 1 < r; i += 2) {
                    const auto uu = rng.uniform_pair(i / 2, n);
                    u[i] = uu[0];
                    u[i + 1] = uu[1];
                }
                const double v = 0.5 * (weight_of(u.data(), false, y) + weight_of(u.data(), true, y));
                part.sum += v;
                part.sum_sq += v * v;
            }
            slots[chunk] = part;
        });
        for (const auto& s : slots) {
            sum += s.sum;
            sum_sq += s.sum_sq;
        }
        pairs += kChunksPerRound * kPairsPerChunk;
        const double mean = sum / static_cast<double>(pairs);
        const double var = std::max(0.0, sum_sq / static_cast<double>(pairs) - mean * mean);
        const double se = std::sqrt(var / static_cast<double>(pairs - 1));
        if (se <= options.target_std_err || pairs >= options.max_pairs) return {mean, se, pairs};
    }
}

CorrelationMatrix asymptotic_correlation(const RaceConfig& config) {
    return correlation_matrix(covariance_asymptotic(config));
}

GaussianPrediction negcorr_expansion(const RaceConfig& config, std::span<const Interval> box) {
    const std::size_t r = config.r();
    if (r > 8) throw ValidationError("negcorr_expansion supports r <= 8");
    check_box(box, r);
    std::vector<double> mass(r), bump(r);
    for (std::size_t j = 0; j < r; ++j) {
        mass[j] = interval_mass(box[j]);
        bump[j] = gauss_bump(box[j].lo) - gauss_bump(box[j].hi);
    }
    GaussianPrediction out;
    out.leading = std::accumulate(mass.begin(), mass.end(), 1.0, std::multiplies<>());
    double sum = 0.0;
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = j + 1; k < r; ++k) {
            double rest = 1.0;
            for (std::size_t i = 0; i < r; ++i)
                if (i != j && i != k) rest *= mass[i];
            sum += delta_repulsion(std::fabs(config.shift(j) - config.shift(k))) * bump[j] * bump[k] * rest;
        }
    out.correction = -sum / (2.0 * std::numbers::pi * log_inverse_delta(config));
    out.value = out.leading + out.correction;
    return out;
}

double order_statistic_product(std::size_t r, std::size_t i, std::size_t l) {
    if (i > l) std::swap(i, l);
    if (r < 2 || i < 1 || i == l || l > r) throw ValidationError("order_statistic_product: need 1 <= i < l <= r");
    static std::mutex mutex;
    static std::map<std::array<std::size_t, 3>, double> cache;
    {
        std::lock_guard lock(mutex);
        if (const auto it = cache.find({r, i, l}); it != cache.end()) return it->second;
    }
    // Joint density of the i-th and l-th largest at u > v.
    const double coeff = factorial(r) / (factorial(i - 1) * factorial(l - i - 1) * factorial(r - l));
    const double inv_root = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    constexpr double kCut = 12.0;
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto outer = [&](double u) {
        const double fu = normal_cdf(u);
        const double pu = inv_root * std::exp(-0.5 * u * u);
        auto inner = [&](double v) {
            const double fv = normal_cdf(v);
            return v * std::pow(fv, static_cast<double>(r - l)) *
                   std::pow(fu - fv, static_cast<double>(l - i - 1)) * inv_root * std::exp(-0.5 * v * v);
        };
        const double in = GK::integrate(inner, -kCut, u, 12, 1e-13);
        return u * std::pow(1.0 - fu, static_cast<double>(i - 1)) * pu * in;
    };
    const double value = coeff * GK::integrate(outer, -kCut, kCut, 12, 1e-13);
    std::lock_guard lock(mutex);
    cache[{r, i, l}] = value;
    return value;
}

GaussianPrediction ordering_prediction(const RaceConfig& config, std::span<const std::size_t> order) {
    const std::size_t r = config.r();
    if (r > 6) throw ValidationError("ordering_prediction supports r <= 6");
    const auto perm = resolve_order(r, order);
    GaussianPrediction out;
    out.leading = 1.0 / factorial(r);
    if (r >= 2) out.correction = -ordering_moment(config, perm) / (factorial(r) * log_inverse_delta(config));
    out.value = out.leading + out.correction;
    return out;
}

GaussianPrediction top_s_prediction(const RaceConfig& config, std::span<const std::size_t> prefix) {
    const std::size_t r = config.r();
    const std::size_t s = prefix.size();
    if (r > 6) throw ValidationError("top_s_prediction supports r <= 6");
    if (s < 1 || s > r) throw ValidationError("top_s_prediction: need 1 <= s <= r");
    std::vector<bool> used(r, false);
    for (const std::size_t j : prefix) {
        if (j >= r || used[j]) throw ValidationError("top_s_prediction: prefix must hold distinct indices < r");
        used[j] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < r; ++j)
        if (!used[j]) rest.push_back(j);
    GaussianPrediction out;
    out.leading = factorial(r - s) / factorial(r);
    if (r >= 2) {
        double moment = 0.0;
        std::vector<std::size_t> perm(prefix.begin(), prefix.end());
        perm.resize(r);
        do {
            std::copy(rest.begin(), rest.end(), perm.begin() + static_cast<std::ptrdiff_t>(s));
            moment += ordering_moment(config, perm);
        } while (std::next_permutation(rest.begin(), rest.end()));
        out.correction = -moment / (factorial(r) * log_inverse_delta(config));
    }
    out.value = out.leading + out.correction;
    return out;
}

GaussianPrediction large_deviation_prediction(std::size_t r, double radius) {
    if (r == 0) throw ValidationError("large_deviation_prediction: r must be positive");
    if (!(radius >= 0.0)) throw ValidationError("large_deviation_prediction: radius must be >= 0");
    GaussianPrediction out;
    out.leading = boost::math::gamma_q(0.5 * static_cast<double>(r), 0.5 * radius * radius);
    out.value = out.leading;
    return out;
}

DensityComparison density_comparison(const Eigen::MatrixXd& c, std::span<const double> x) {
    const auto r = static_cast<std::size_t>(c.rows());
    if (r == 0 || c.cols() != c.rows() || x.size() != r) throw ValidationError("density_comparison: bad dimensions");
    const Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) throw ValidationError("density_comparison: C is singular");
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(r));
    const Eigen::MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (std::size_t i = 0; i < r; ++i) log_det += 2.0 * std::log(l(i, i));
    if (!std::isfinite(log_det) || log_det < -700.0) throw ValidationError("density_comparison: C is singular");
    const double quad = v.dot(llt.solve(v));
    const double norm = -0.5 * static_cast<double>(r) * std::log(2.0 * std::numbers::pi);
    double cross = 0.0;
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t k = j + 1; k < r; ++k) cross += c(j, k) * x[j] * x[k];
    DensityComparison out;
    out.exact = std::exp(norm - 0.5 * log_det - 0.5 * quad);
    out.approx = std::exp(norm - 0.5 * v.squaredNorm() + cross);
    out.ratio = std::exp((-0.5 * v.squaredNorm() + cross) - (-0.5 * log_det - 0.5 * quad));
    return out;
}

}  // namespace shortrace
