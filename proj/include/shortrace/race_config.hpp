#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shortrace {

// r disjoint short intervals of length delta*x centred at (1 + t_j*delta)*x.
class RaceConfig {
public:
    // Requires delta in (0, 1/4], r >= 1 and |t_j - t_k| >= 1 for j != k.
    RaceConfig(double delta, std::vector<double> shifts);

    double delta() const noexcept { return delta_; }
    std::span<const double> shifts() const noexcept { return shifts_; }
    double shift(std::size_t j) const { return shifts_.at(j); }
    std::size_t r() const noexcept { return shifts_.size(); }

    // T_S = 1 + max |t_j| over the whole index set.
    double t_max() const noexcept;

    // 2 <= (1 + t_j delta)x - delta x/2 and (1 + t_j delta)x + delta x/2 <= 2x for all j.
    bool admissible_at(double x) const noexcept;
    void require_admissible(double x) const;

    // Real endpoints (a, b] of interval j at x.
    double lower(double x, std::size_t j) const noexcept;
    double upper(double x, std::size_t j) const noexcept;

    // Subset of coordinates, in the given order.
    RaceConfig select(std::span<const std::size_t> indices) const;

private:
    double delta_;
    std::vector<double> shifts_;
};

// Parses "a,b,c" into reals. Throws ValidationError on malformed input.
std::vector<double> parse_csv_reals(std::string_view text);

std::string describe(const RaceConfig& config);

}  // namespace shortrace
