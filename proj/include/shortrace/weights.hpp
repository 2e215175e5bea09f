#pragma once

#include <complex>

namespace shortrace {

inline constexpr double kEulerGamma = 0.57721566490153286061;

// w(s; delta, t) = [(1 + (t+1/2)delta)^s - (1 + (t-1/2)delta)^s] / s.
// Requires s != 0 and 1 + (t-1/2)delta > 0.
std::complex<double> weight(std::complex<double> s, double delta, double t);

// w at rho = 1/2 + i gamma.
inline std::complex<double> weight_at_zero(double gamma, double delta, double t) {
    return weight({0.5, gamma}, delta, t);
}

// |w(s)| <= 10 min{T delta, 1/|s|} with T = 1 + |t|. Meant for |Re s| <= 1, |Im s| > 10.
bool weight_bound_check(std::complex<double> s, double delta, double t);

// Delta(t) = ((t+1)log(t+1) - 2t log t + (t-1)log(t-1)) / 2 for t >= 1.
double delta_repulsion(double t);

}  // namespace shortrace
