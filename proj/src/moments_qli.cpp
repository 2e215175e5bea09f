#include "shortrace/moments_qli.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/summation.hpp"
#include "shortrace/weights.hpp"

namespace shortrace {

namespace {

constexpr std::size_t kNodeChunk = 4096;
constexpr std::size_t kQliBudget = 2000;

double smooth_step(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    const double f = std::exp(-1.0 / y);
    const double g = std::exp(-1.0 / (1.0 - y));
    return f / (f + g);
}

std::span<const double> covered_zeros(const ZeroTable& zeros, double height, const char* what) {
    if (!(height > 0.0)) throw ValidationError(std::string(what) + ": height must be positive");
    if (!zeros.covers(height)) {
        std::ostringstream msg;
        msg << what << ": height " << height << " exceeds zero table '" << zeros.source_id() << "' (max "
            << zeros.max_height() << ")";
        throw CoverageError(msg.str());
    }
    return zeros.up_to(height);
}

void require_single(const RaceConfig& config, const char* what) {
    if (config.r() != 1) throw ValidationError(std::string(what) + " uses a single interval (r = 1)");
}

}  // namespace

SmoothWeight::SmoothWeight(double epsilon) : epsilon_(epsilon), raw_mass_(1.0) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw ValidationError("SmoothWeight: epsilon must lie in (0, 1/2)");
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto f = [this](double v) { return raw(v); };
    const double up = GK::integrate(f, 0.5, 1.0 + epsilon, 15, 1e-14);
    const double down = GK::integrate(f, 2.0 - epsilon, 2.5, 15, 1e-14);
    raw_mass_ = up + (1.0 - 2.0 * epsilon) + down;
}

double SmoothWeight::raw(double v) const noexcept {
    const double width = 0.5 + epsilon_;
    return smooth_step((v - 0.5) / width) * smooth_step((2.5 - v) / width);
}

double gaussian_moment(int k) {
    if (k < 0) throw ValidationError("gaussian_moment: k must be >= 0");
    if (k % 2 != 0) return 0.0;
    // (k-1)!! = k! / (2^{k/2} (k/2)!)
    double m = 1.0;
    for (int i = k - 1; i > 1; i -= 2) m *= i;
    return m;
}

std::size_t nyquist_nodes(int k, double gamma_max, double horizon) {
    return static_cast<std::size_t>(std::ceil(2.0 * horizon * k * gamma_max / std::numbers::pi));
}

MomentResult weighted_moments(std::span<const int> ks, const RaceConfig& config, const ZeroTable& zeros,
                              const SmoothWeight& w, const MomentOptions& options) {
    require_single(config, "weighted_moment");
    if (ks.empty()) throw ValidationError("weighted_moment: no k given");
    for (const int k : ks)
        if (k < 1 || k > 8) throw ValidationError("weighted_moment: k must lie in 1..8");
    const double horizon = options.horizon;
    if (!(horizon > 0.0)) throw ValidationError("weighted_moment: U must be positive");
    const auto gammas = covered_zeros(zeros, options.height, "weighted_moment");
    if (config.delta() * options.height < 20.0) throw ValidationError("weighted_moment: needs delta * T >= 20");

    MomentResult out;
    out.ks.assign(ks.begin(), ks.end());
    out.height = options.height;
    out.horizon = horizon;
    out.zero_count = gammas.size();
    const int k_max = *std::max_element(ks.begin(), ks.end());
    out.required_nodes = nyquist_nodes(k_max, gammas.back(), horizon);
    out.nodes = options.quad_points == 0 ? 2 * out.required_nodes : options.quad_points;
    if (out.nodes < out.required_nodes) {
        std::ostringstream msg;
        msg << "weighted_moment: " << out.nodes << " nodes cannot resolve frequency " << k_max << " * "
            << gammas.back() << " over U = " << horizon << "; need at least " << out.required_nodes;
        throw BudgetError(msg.str());
    }

    const std::size_t n = gammas.size();
    std::vector<double> re(n), im(n);
    CompensatedSum var;
    for (std::size_t i = 0; i < n; ++i) {
        const auto wi = weight_at_zero(gammas[i], config.delta(), config.shift(0));
        re[i] = wi.real();
        im[i] = wi.imag();
        var.add(2.0 * std::norm(wi));
    }
    out.variance = var.value();

    const double lo = 0.5 * horizon;
    const double h = 2.0 * horizon / static_cast<double>(out.nodes);
    std::vector<double> step_c(n), step_s(n);
    for (std::size_t i = 0; i < n; ++i) {
        step_c[i] = std::cos(gammas[i] * h);
        step_s[i] = std::sin(gammas[i] * h);
    }

    // E^(T) at every node. Each chunk starts from exact phases and rotates.
    std::vector<double> values(out.nodes);
    const std::size_t chunks = (out.nodes + kNodeChunk - 1) / kNodeChunk;
    for_each_chunk(chunks, options.threads, [&](std::size_t c) {
        const std::size_t first = c * kNodeChunk;
        const std::size_t last = std::min(out.nodes, first + kNodeChunk);
        std::vector<double> cs(n), sn(n);
        const double u0 = lo + (static_cast<double>(first) + 0.5) * h;
        for (std::size_t i = 0; i < n; ++i) {
            cs[i] = std::cos(gammas[i] * u0);
            sn[i] = std::sin(gammas[i] * u0);
        }
        for (std::size_t m = first; m < last; ++m) {
            CompensatedSum sum;
            for (std::size_t i = 0; i < n; ++i) {
                sum.add(re[i] * cs[i] - im[i] * sn[i]);
                const double c2 = cs[i] * step_c[i] - sn[i] * step_s[i];
                sn[i] = sn[i] * step_c[i] + cs[i] * step_s[i];
                cs[i] = c2;
            }
            values[m] = -2.0 * sum.value();
        }
    });

    const double inv_sd = 1.0 / std::sqrt(out.variance);
    std::vector<CompensatedSum> acc(ks.size());
    for (std::size_t m = 0; m < out.nodes; ++m) {
        const double u = lo + (static_cast<double>(m) + 0.5) * h;
        const double wt = w(u / horizon);
        if (wt == 0.0) continue;
        const double e = values[m] * inv_sd;
        for (std::size_t q = 0; q < ks.size(); ++q) acc[q].add(wt * std::pow(e, ks[q]));
    }
    for (std::size_t q = 0; q < ks.size(); ++q) {
        out.values.push_back(acc[q].value() * h / horizon);
        out.gaussian.push_back(gaussian_moment(ks[q]));
    }
    return out;
}

double weighted_moment(int k, const RaceConfig& config, const ZeroTable& zeros, const SmoothWeight& w,
                       const MomentOptions& options) {
    const int ks[] = {k};
    return weighted_moments(ks, config, zeros, w, options).values[0];
}

TruncationGap truncation_gap(double height, const RaceConfig& config, const ZeroTable& zeros) {
    require_single(config, "truncation_gap");
    covered_zeros(zeros, height, "truncation_gap");
    const auto all = zeros.ordinates();
    const auto head = zeros.up_to(height).size();
    CompensatedSum gap;
    for (std::size_t i = head; i < all.size(); ++i)
        gap.add(2.0 * std::norm(weight_at_zero(all[i], config.delta(), config.shift(0))));
    return {gap.value(), 3.0 * std::log(height) / height};
}

double qli_threshold(double height, int k, double c_k) {
    if (c_k == 0.0) c_k = k + 1;
    if (!(c_k > k)) throw ValidationError("qli: c_k must exceed k");
    if (!(height > 1.0)) throw ValidationError("qli: T must exceed 1");
    return std::pow(height, -c_k);
}

QliCount qli_resonance_count(std::span<const int> signs, const ZeroTable& zeros, double height, double threshold) {
    const int k = static_cast<int>(signs.size());
    if (k < 2 || k > 4) throw ValidationError("qli_resonance_count: k must be 2, 3 or 4");
    for (const int s : signs)
        if (s != 1 && s != -1) throw ValidationError("qli_resonance_count: signs must be +1 or -1");
    if (!(threshold > 0.0)) throw ValidationError("qli_resonance_count: threshold must be positive");
    const auto g = covered_zeros(zeros, height, "qli_resonance_count");
    const std::size_t n = g.size();
    if (k >= 3 && n > kQliBudget) {
        std::ostringstream msg;
        msg << "qli_resonance_count: N(T) = " << n << " exceeds the enumeration budget " << kQliBudget << " for k = "
            << k;
        throw BudgetError(msg.str());
    }

    QliCount out;
    out.k = k;
    out.signs.assign(signs.begin(), signs.end());
    out.height = height;
    out.threshold = threshold;
    out.zero_count = n;
    if (n == 0) return out;

    // Split into left = first m signs, right = the rest; count pairs with
    // right in [-left - threshold, -left + threshold].
    const int m = k == 2 ? 1 : 2;
    auto left_value = [&](std::size_t i, std::size_t j) {
        return m == 1 ? signs[0] * g[i] : signs[0] * g[i] + signs[1] * g[j];
    };
    auto right_value = [&](std::size_t i, std::size_t j) {
        return k - m == 1 ? signs[m] * g[i] : signs[m] * g[i] + signs[m + 1] * g[j];
    };
    const std::size_t right_size = k - m == 1 ? n : n * n;
    std::vector<double> right(right_size);
    for (std::size_t a = 0; a < right_size; ++a) right[a] = right_value(a % n, a / n);
    std::sort(right.begin(), right.end());
    auto in_window = [&](double l) {
        const auto lo = std::lower_bound(right.begin(), right.end(), -l - threshold);
        const auto hi = std::upper_bound(right.begin(), right.end(), -l + threshold);
        return static_cast<std::uint64_t>(hi - lo);
    };

    const std::size_t left_size = m == 1 ? n : n * n;
    const std::size_t chunk = 4096;
    const std::size_t chunks = (left_size + chunk - 1) / chunk;
    std::vector<std::uint64_t> partial(chunks, 0);
    for_each_chunk(chunks, 1, [&](std::size_t c) {
        std::uint64_t cnt = 0;
        for (std::size_t a = c * chunk; a < std::min(left_size, (c + 1) * chunk); ++a)
            cnt += in_window(left_value(a % n, a / n));
        partial[c] = cnt;
    });
    std::uint64_t total = 0;
    for (const auto p : partial) total += p;

    // Diagonal tuples: equal multisets of + and - indices. They exist only for
    // k = 2 with opposite signs and k = 4 with two of each sign.
    int plus = 0;
    for (const int s : signs) plus += s > 0;
    std::uint64_t diag_in_window = 0;
    auto window_has = [&](const std::array<std::size_t, 4>& idx) {
        const double l = left_value(idx[0], idx[1]);
        const double r = k - m == 1 ? right_value(idx[m], 0) : right_value(idx[m], idx[m + 1]);
        return r >= -l - threshold && r <= -l + threshold;
    };
    if (k == 2 && plus == 1) {
        out.diagonal = n;
        for (std::size_t i = 0; i < n; ++i) diag_in_window += window_has({i, i, i, i}) ? 1 : 0;
    } else if (k == 4 && plus == 2) {
        std::array<std::size_t, 2> pos{}, neg{};
        for (int q = 0, p = 0, r = 0; q < 4; ++q) (signs[q] > 0 ? pos[p++] : neg[r++]) = static_cast<std::size_t>(q);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                std::array<std::size_t, 4> idx{};
                idx[pos[0]] = i;
                idx[pos[1]] = j;
                idx[neg[0]] = i;
                idx[neg[1]] = j;
                diag_in_window += window_has(idx) ? 1 : 0;
                ++out.diagonal;
                if (i != j) {
                    idx[neg[0]] = j;
                    idx[neg[1]] = i;
                    diag_in_window += window_has(idx) ? 1 : 0;
                    ++out.diagonal;
                }
            }
    }
    out.count = total - diag_in_window;
    out.ratio = static_cast<double>(out.count) / std::pow(static_cast<double>(n), 0.5 * k);
    return out;
}

}  // namespace shortrace
