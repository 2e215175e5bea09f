#include "shortrace/psi_sieve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <utility>

#include "shortrace/errors.hpp"
#include "shortrace/summation.hpp"

namespace shortrace {

namespace {

struct PrimePower {
    std::uint64_t value;
    double log_p;
};

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// p^k with k >= 2, p^k <= hi, sorted by value.
std::vector<PrimePower> higher_prime_powers(std::span<const std::uint32_t> primes, std::uint64_t hi) {
    std::vector<PrimePower> out;
    for (const std::uint32_t p : primes) {
        const std::uint64_t pp = std::uint64_t{p} * p;
        if (pp > hi) break;
        const double lp = std::log(static_cast<double>(p));
        for (std::uint64_t v = pp;; v *= p) {
            out.push_back({v, lp});
            if (v > hi / p) break;
        }
    }
    std::sort(out.begin(), out.end(), [](const PrimePower& a, const PrimePower& b) { return a.value < b.value; });
    return out;
}

using Events = std::vector<std::pair<std::uint64_t, double>>;

// Prime powers in [seg_lo, seg_hi), ascending.
void sieve_segment(std::uint64_t seg_lo, std::uint64_t seg_hi, std::span<const std::uint32_t> primes,
                   std::span<const PrimePower> powers, std::vector<unsigned char>& composite, Events& out) {
    out.clear();
    const std::size_t len = seg_hi - seg_lo;
    composite.assign(len, 0);
    for (const std::uint32_t p : primes) {
        const std::uint64_t pp = std::uint64_t{p} * p;
        if (pp >= seg_hi) break;
        std::uint64_t start = std::max<std::uint64_t>(pp, (seg_lo + p - 1) / p * p);
        for (std::uint64_t m = start; m < seg_hi; m += p) composite[m - seg_lo] = 1;
    }
    auto pw = std::lower_bound(powers.begin(), powers.end(), seg_lo,
                               [](const PrimePower& a, std::uint64_t v) { return a.value < v; });
    for (std::uint64_t n = std::max<std::uint64_t>(seg_lo, 2); n < seg_hi; ++n) {
        if (composite[n - seg_lo]) {
            if (pw != powers.end() && pw->value == n) {
                out.emplace_back(n, pw->log_p);
                ++pw;
            }
            continue;
        }
        out.emplace_back(n, std::log(static_cast<double>(n)));
    }
}

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace

std::vector<std::uint32_t> small_primes(std::uint32_t limit) {
    std::vector<std::uint32_t> primes;
    if (limit < 2) return primes;
    std::vector<unsigned char> composite(limit + 1, 0);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t m = i * i; m <= limit; m += i) composite[m] = 1;
    }
    return primes;
}

void for_each_prime_power(std::uint64_t lo, std::uint64_t hi, const SieveOptions& options,
                          const std::function<void(std::uint64_t, double)>& visit) {
    if (hi <= lo) return;
    if (hi > options.ceiling) {
        std::ostringstream msg;
        msg << "sieve ceiling " << options.ceiling << " exceeded (requested " << hi << ")";
        throw BudgetError(msg.str());
    }
    if (options.segment_size == 0) throw ValidationError("segment_size must be positive");

    const auto root = static_cast<std::uint32_t>(isqrt(hi));
    const auto primes = small_primes(root);
    const auto powers = higher_prime_powers(primes, hi);
    const unsigned threads = resolve_threads(options.threads);

    // integers lo+1 .. hi, i.e. [lo + 1, hi + 1)
    const std::uint64_t begin = lo + 1;
    const std::uint64_t end = hi + 1;
    const std::uint64_t seg = options.segment_size;
    const std::uint64_t n_segments = (end - begin + seg - 1) / seg;

    if (threads == 1) {
        std::vector<unsigned char> composite;
        Events events;
        for (std::uint64_t s = 0; s < n_segments; ++s) {
            const std::uint64_t a = begin + s * seg;
            sieve_segment(a, std::min(end, a + seg), primes, powers, composite, events);
            for (const auto& [n, lp] : events) visit(n, lp);
        }
        return;
    }

    std::vector<Events> batch(threads);
    std::vector<std::vector<unsigned char>> scratch(threads);
    for (std::uint64_t first = 0; first < n_segments; first += threads) {
        const auto count = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_segments - first));
        std::vector<std::jthread> workers;
        workers.reserve(count);
        for (unsigned w = 0; w < count; ++w) {
            workers.emplace_back([&, w] {
                const std::uint64_t a = begin + (first + w) * seg;
                sieve_segment(a, std::min(end, a + seg), primes, powers, scratch[w], batch[w]);
            });
        }
        workers.clear();  // join
        for (unsigned w = 0; w < count; ++w)
            for (const auto& [n, lp] : batch[w]) visit(n, lp);
    }
}

double psi_streaming(double x, const SieveOptions& options) {
    if (!(x >= 0.0)) throw ValidationError("psi: x must be >= 0");
    if (x > static_cast<double>(options.ceiling)) {
        std::ostringstream msg;
        msg << "psi: x = " << x << " exceeds sieve ceiling " << options.ceiling;
        throw BudgetError(msg.str());
    }
    CompensatedSum sum;
    for_each_prime_power(0, static_cast<std::uint64_t>(std::floor(x)), options,
                         [&](std::uint64_t, double lp) { sum.add(lp); });
    return sum.value();
}

PsiTable::PsiTable(std::uint64_t limit, const SieveOptions& options) : limit_(limit) {
    if (limit > options.ceiling) {
        std::ostringstream msg;
        msg << "psi table limit " << limit << " exceeds sieve ceiling " << options.ceiling;
        throw BudgetError(msg.str());
    }
    // pi(x) < 1.26 x / log x for x > 1
    if (limit > 16) {
        const double est = 1.3 * static_cast<double>(limit) / std::log(static_cast<double>(limit));
        positions_.reserve(static_cast<std::size_t>(est));
        cumulative_.reserve(static_cast<std::size_t>(est));
    }
    CompensatedSum sum;
    const std::uint64_t seg = options.segment_size;
    PsiSegment current{1, std::min<std::uint64_t>(limit + 1, 1 + seg), 0.0, 0.0};
    for_each_prime_power(0, limit, options, [&](std::uint64_t n, double lp) {
        while (n >= current.end) {
            current.psi_end = sum.value();
            segments_.push_back(current);
            current = {current.end, std::min<std::uint64_t>(limit + 1, current.end + seg), current.psi_end, 0.0};
        }
        sum.add(lp);
        positions_.push_back(n);
        cumulative_.push_back(sum.value());
    });
    while (true) {
        current.psi_end = sum.value();
        segments_.push_back(current);
        if (current.end >= limit + 1) break;
        current = {current.end, std::min<std::uint64_t>(limit + 1, current.end + seg), current.psi_end, 0.0};
    }
}

void PsiTable::check_range(double x) const {
    if (!(x >= 0.0)) throw ValidationError("psi: argument must be >= 0");
    if (x >= static_cast<double>(limit_) + 1.0) {
        std::ostringstream msg;
        msg << "psi table covers x <= " << limit_ << ", requested " << x;
        throw BudgetError(msg.str());
    }
}

double PsiTable::psi_at_integer(std::uint64_t n) const {
    const auto it = std::upper_bound(positions_.begin(), positions_.end(), n);
    if (it == positions_.begin()) return 0.0;
    return cumulative_[static_cast<std::size_t>(it - positions_.begin()) - 1];
}

double PsiTable::psi(double x) const {
    check_range(x);
    return psi_at_integer(static_cast<std::uint64_t>(std::floor(x)));
}

double PsiTable::interval_sum(double a, double b) const {
    check_range(a);
    check_range(b);
    if (b < a) throw ValidationError("interval_sum: need a <= b");
    return psi_at_integer(static_cast<std::uint64_t>(std::floor(b))) -
           psi_at_integer(static_cast<std::uint64_t>(std::floor(a)));
}

double PsiTable::deviation(double x, const RaceConfig& config, std::size_t j) const {
    config.require_admissible(x);
    const double lo = config.lower(x, j);
    const double hi = config.upper(x, j);
    return (interval_sum(lo, hi) - config.delta() * x) / std::sqrt(x);
}

std::vector<double> PsiTable::deviation_vector(double x, const RaceConfig& config) const {
    std::vector<double> out(config.r());
    for (std::size_t j = 0; j < config.r(); ++j) out[j] = deviation(x, config, j);
    return out;
}

}  // namespace shortrace
