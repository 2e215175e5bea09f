#include "shortrace/weights.hpp"

#include <algorithm>
#include <cmath>

#include "shortrace/errors.hpp"

namespace shortrace {

std::complex<double> weight(std::complex<double> s, double delta, double t) {
    if (s == std::complex<double>{})
        throw ValidationError("weight: s = 0 is not allowed");
    const double lo = 1.0 + (t - 0.5) * delta;
    if (!(lo > 0.0))
        throw ValidationError("weight: need 1 + (t - 1/2) delta > 0");
    // a^s - b^s = exp(s (A+B)/2) * 2 sinh(s D/2), D = log(a/b) formed without cancellation
    const double log_a = std::log1p((t + 0.5) * delta);
    const double log_b = std::log1p((t - 0.5) * delta);
    const double d = std::log1p(delta / lo);
    return std::exp(s * (0.5 * (log_a + log_b))) * (2.0 * std::sinh(s * (0.5 * d))) / s;
}

bool weight_bound_check(std::complex<double> s, double delta, double t) {
    const double bound = 10.0 * std::min((1.0 + std::fabs(t)) * delta, 1.0 / std::abs(s));
    return std::abs(weight(s, delta, t)) <= bound;
}

double delta_repulsion(double t) {
    if (!(t >= 1.0))
        throw ValidationError("delta_repulsion: need t >= 1");
    if (t == 1.0) return std::log(2.0);
    if (t < 2.0)
        return 0.5 * ((t + 1.0) * std::log(t + 1.0) - 2.0 * t * std::log(t) + (t - 1.0) * std::log(t - 1.0));
    const double u = 1.0 / t;
    return 0.5 * (2.0 * std::atanh(u) + t * std::log1p(-u * u));
}

}  // namespace shortrace
