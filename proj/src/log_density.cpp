#include "shortrace/log_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shortrace/covariance.hpp"
#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/rng.hpp"
#include "shortrace/summation.hpp"

namespace shortrace {

namespace {

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void require_rows(const EmpiricalDistribution& dist, std::size_t min_n) {
    if (dist.n() < min_n) {
        std::ostringstream msg;
        msg << "empirical distribution needs n >= " << min_n << " (has " << dist.n() << ")";
        throw ValidationError(msg.str());
    }
}

}  // namespace

std::vector<double> EmpiricalDistribution::column(std::size_t j) const {
    if (j >= r()) throw ValidationError("coordinate out of range");
    std::vector<double> out(n());
    for (std::size_t i = 0; i < n(); ++i) out[i] = rows[i * r() + j];
    return out;
}

EmpiricalDistribution collect(double x_lo, double x_hi, const RaceConfig& config, const PsiTable& psi,
                              const ZeroTable& zeros, std::size_t n, std::uint64_t seed, unsigned threads) {
    if (n == 0) throw ValidationError("collect: n must be positive");
    if (!(x_lo > 0.0 && x_hi > x_lo)) throw ValidationError("collect: need 0 < x_lo < x_hi");
    if (x_hi >= static_cast<double>(psi.limit()) / (1.0 + config.t_max() * config.delta())) {
        std::ostringstream msg;
        msg << "collect: x_hi = " << x_hi << " needs psi beyond the sieve limit " << psi.limit();
        throw BudgetError(msg.str());
    }
    config.require_admissible(x_lo);

    EmpiricalDistribution out{config, x_lo, x_hi, seed, {}, {}, {}, zeros.max_height(), zeros.source_id()};
    const auto cov = covariance_numeric(config, zeros, zeros.max_height(), threads).numeric;
    const std::size_t r = config.r();
    out.variances.resize(r);
    std::vector<double> scale(r);
    for (std::size_t j = 0; j < r; ++j) {
        out.variances[j] = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        scale[j] = 1.0 / std::sqrt(out.variances[j]);
    }
    out.xs.resize(n);
    out.rows.resize(n * r);
    const CounterRng rng(seed);
    const double u_lo = std::log(x_lo), u_hi = std::log(x_hi);
    constexpr std::size_t kChunk = 256;
    for_each_chunk((n + kChunk - 1) / kChunk, threads, [&](std::size_t c) {
        for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
            const double x = std::exp(u_lo + (u_hi - u_lo) * rng.uniform(0, i));
            out.xs[i] = x;
            for (std::size_t j = 0; j < r; ++j) out.rows[i * r + j] = psi.deviation(x, config, j) * scale[j];
        }
    });
    return out;
}

double ks_statistic(std::span<const double> samples) {
    if (samples.empty()) throw ValidationError("ks_statistic: no samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = phi(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_statistic(const EmpiricalDistribution& dist, std::size_t j) {
    require_rows(dist, 100);
    return ks_statistic(dist.column(j));
}

ColumnMoments column_moments(const EmpiricalDistribution& dist, std::size_t j) {
    require_rows(dist, 2);
    const auto col = dist.column(j);
    CompensatedSum s;
    for (const double v : col) s.add(v);
    const double mean = s.value() / static_cast<double>(col.size());
    CompensatedSum q;
    for (const double v : col) q.add((v - mean) * (v - mean));
    return {mean, q.value() / static_cast<double>(col.size() - 1)};
}

double empirical_correlation(const EmpiricalDistribution& dist, std::size_t j, std::size_t k) {
    require_rows(dist, 2);
    const auto a = dist.column(j), b = dist.column(k);
    const auto ma = column_moments(dist, j).mean, mb = column_moments(dist, k).mean;
    CompensatedSum sab, saa, sbb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab.add((a[i] - ma) * (b[i] - mb));
        saa.add((a[i] - ma) * (a[i] - ma));
        sbb.add((b[i] - mb) * (b[i] - mb));
    }
    if (!(saa.value() > 0.0 && sbb.value() > 0.0)) throw ValidationError("correlation undefined (constant column)");
    return sab.value() / std::sqrt(saa.value() * sbb.value());
}

DensityEstimate empirical_event_density(const EmpiricalDistribution& dist, const Event& event) {
    require_rows(dist, 100);
    std::uint64_t hits = 0;
    for (std::size_t i = 0; i < dist.n(); ++i) hits += event(dist.row(i)) ? 1 : 0;
    return bernoulli_estimate(hits, dist.n(), EstimateMethod::SieveEmpirical);
}

}  // namespace shortrace
