#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shortrace/race_config.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace {

// W >= 0 supported in (1/2, 5/2), equal to its maximum on [1+eps, 2-eps],
// with smooth steps S(y) = f(y)/(f(y)+f(1-y)), f(y) = e^{-1/y}, on the two
// ramps. Normalized to unit mass.
class SmoothWeight {
public:
    explicit SmoothWeight(double epsilon = 0.1);

    double epsilon() const noexcept { return epsilon_; }
    double raw_mass() const noexcept { return raw_mass_; }  // by quadrature
    double operator()(double v) const noexcept { return raw(v) / raw_mass_; }
    double raw(double v) const noexcept;

private:
    double epsilon_;
    double raw_mass_;
};

struct MomentOptions {
    double height = 0.0;           // T; zeros 0 < gamma <= T
    double horizon = 30.0;         // U
    std::size_t quad_points = 0;   // 0 = twice the Nyquist minimum
    unsigned threads = 1;
};

struct MomentResult {
    std::vector<int> ks;
    std::vector<double> values;  // (1/U) int E~(e^u)^k W(u/U) du
    std::vector<double> gaussian;  // mu_k
    double variance = 0.0;         // V^(T) = 2 sum |w|^2
    std::size_t nodes = 0;
    std::size_t required_nodes = 0;
    std::size_t zero_count = 0;
    double height = 0.0;
    double horizon = 0.0;
};

// k! / (2^{k/2} (k/2)!) for even k, 0 for odd k.
double gaussian_moment(int k);

// Nodes needed to resolve frequency k * gamma_max on [U/2, 5U/2]: ceil(2 U k gamma_max / pi).
std::size_t nyquist_nodes(int k, double gamma_max, double horizon);

// Uniform nodes on [U/2, 5U/2]; E~ = E^(T)/sqrt(V^(T)). Requires r = 1,
// delta * T >= 20, 1 <= k <= 8. Throws BudgetError naming the required node
// count when quad_points is below the Nyquist minimum for the largest k.
MomentResult weighted_moments(std::span<const int> ks, const RaceConfig& config, const ZeroTable& zeros,
                              const SmoothWeight& w, const MomentOptions& options);
double weighted_moment(int k, const RaceConfig& config, const ZeroTable& zeros, const SmoothWeight& w,
                       const MomentOptions& options);

struct TruncationGap {
    double gap = 0.0;    // V(whole table) - V^(T)
    double bound = 0.0;  // 3 log T / T
};

TruncationGap truncation_gap(double height, const RaceConfig& config, const ZeroTable& zeros);

// Near-resonance threshold T^{-c_k}; c_k defaults to k + 1, an arbitrary probe value.
double qli_threshold(double height, int k, double c_k = 0.0);

struct QliCount {
    int k = 0;
    std::vector<int> signs;
    double height = 0.0;
    double threshold = 0.0;
    std::size_t zero_count = 0;
    std::uint64_t count = 0;     // ordered tuples with 0 < |<eps, gamma>| <= threshold
    std::uint64_t diagonal = 0;  // tuples whose + and - indices pair off exactly
    double ratio = 0.0;          // count / N(T)^{k/2}
};

// k in {2, 3, 4}; N(T) <= 2000 for k >= 3. Diagonal tuples are recognised
// by their indices, never by the rounded value of the sum.
QliCount qli_resonance_count(std::span<const int> signs, const ZeroTable& zeros, double height, double threshold);

}  // namespace shortrace
