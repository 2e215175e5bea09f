#pragma once

#include <cmath>

namespace shortrace {

// Neumaier's variant of Kahan summation. Order-dependent by nature: callers
// that need reproducible results must feed terms in a fixed order.
class CompensatedSum {
public:
    // Knuth's branch-free TwoSum yields the same rounding error as the
    // magnitude test of the textbook form, without mispredicted branches.
    void add(double x) noexcept {
        const double t = sum_ + x;
        const double xv = t - sum_;
        comp_ += (sum_ - (t - xv)) + (x - xv);
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    // Merges another partial sum; the result depends on merge order.
    void merge(const CompensatedSum& other) noexcept {
        add(other.sum_);
        add(other.comp_);
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace shortrace
