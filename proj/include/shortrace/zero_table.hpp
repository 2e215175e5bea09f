#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shortrace {

// Positive ordinates gamma_n of nontrivial zeros 1/2 + i*gamma_n, ascending.
// Negative ordinates are implied by conjugate symmetry and never stored.
class ZeroTable {
public:
    // Validates: non-empty, strictly increasing, positive, first ordinate in
    // (14.0, 14.2), precision_digits >= 9.
    ZeroTable(std::vector<double> ordinates, std::string source_id, int precision_digits = 9);

    std::span<const double> ordinates() const noexcept { return ordinates_; }
    std::size_t size() const noexcept { return ordinates_.size(); }
    double operator[](std::size_t i) const noexcept { return ordinates_[i]; }
    double max_height() const noexcept { return ordinates_.back(); }
    const std::string& source_id() const noexcept { return source_id_; }
    int precision_digits() const noexcept { return precision_digits_; }

    // Ordinates with gamma <= height.
    std::span<const double> up_to(double height) const;

    bool covers(double height) const noexcept { return height <= max_height(); }

private:
    std::vector<double> ordinates_;
    std::string source_id_;
    int precision_digits_;
};

// Plain text, one decimal ordinate per line. Blank lines and lines starting
// with '#' are skipped. Reads at most `limit` ordinates when given.
ZeroTable load_zeros(const std::filesystem::path& path, std::optional<std::size_t> limit = {},
                     int precision_digits = 9);

// Directory holding the bundled tables: $SHORTRACE_DATA_DIR if set, else the
// data/ directory of the source tree.
std::filesystem::path default_data_dir();

struct ZeroCount {
    std::size_t count = 0;
    bool covered = true;  // false when T lies beyond the last ordinate
};

// N(T) = #{n : gamma_n <= T}.
ZeroCount count_below(const ZeroTable& table, double height);

// Riemann-von Mangoldt main term (T/2pi) log(T/2pi) - T/2pi.
double rvm_main_term(double height);

struct RvmResidual {
    double height = 0.0;
    double residual = 0.0;  // N(T) minus main term
    bool covered = true;
};

std::vector<RvmResidual> rvm_residuals(const ZeroTable& table, std::span<const double> grid);

}  // namespace shortrace
