#include "shortrace/bessel.hpp"

#include <cmath>
#include <numbers>

namespace shortrace {

namespace {

constexpr double kSeriesLimit = 17.0;

double j0_series(double x) {
    const long double q = -0.25L * static_cast<long double>(x) * x;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum) && std::fabs(term) < 1e-22L) break;
    }
    return static_cast<double>(sum);
}

double j0_asymptotic(double x) {
    // a_k = prod_{m<=k} (2m-1)^2 / (k! 8^k)
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;
    double prev = INFINITY;
    for (int k = 1; k < 60; ++k) {
        a *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (a >= prev) break;
        prev = a;
        switch (k % 4) {
            case 1: q -= a; break;
            case 2: p -= a; break;
            case 3: q += a; break;
            case 0: p += a; break;
        }
        if (a < 1e-17) break;
    }
    // cos(x - pi/4) = (cos x + sin x)/sqrt2, sin(x - pi/4) = (sin x - cos x)/sqrt2
    const double c = std::cos(x);
    const double s = std::sin(x);
    const double amp = std::sqrt(1.0 / (std::numbers::pi * x));
    return amp * (p * (c + s) - q * (s - c));
}

}  // namespace

double bessel_j0(double x) {
    x = std::fabs(x);
    return x <= kSeriesLimit ? j0_series(x) : j0_asymptotic(x);
}

}  // namespace shortrace
