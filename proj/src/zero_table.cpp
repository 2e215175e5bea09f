#include "shortrace/zero_table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shortrace/errors.hpp"

#ifndef SHORTRACE_SOURCE_DATA_DIR
#define SHORTRACE_SOURCE_DATA_DIR "data"
#endif

namespace shortrace {

ZeroTable::ZeroTable(std::vector<double> ordinates, std::string source_id, int precision_digits)
    : ordinates_(std::move(ordinates)), source_id_(std::move(source_id)), precision_digits_(precision_digits) {
    if (ordinates_.empty())
        throw ValidationError("zero table '" + source_id_ + "' is empty");
    if (precision_digits_ < 9)
        throw ValidationError("zero table precision_digits must be >= 9");
    if (!(ordinates_.front() > 14.0 && ordinates_.front() < 14.2)) {
        std::ostringstream msg;
        msg << "zero table '" << source_id_ << "': first ordinate " << ordinates_.front()
            << " is not the first zero (expected 14.1347...)";
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 1; i < ordinates_.size(); ++i) {
        if (!(ordinates_[i] > ordinates_[i - 1])) {
            std::ostringstream msg;
            msg << "zero table '" << source_id_ << "': ordinate " << i + 1 << " (" << ordinates_[i]
                << ") does not exceed ordinate " << i << " (" << ordinates_[i - 1] << ")";
            throw ValidationError(msg.str());
        }
    }
}

std::span<const double> ZeroTable::up_to(double height) const {
    const auto end = std::upper_bound(ordinates_.begin(), ordinates_.end(), height);
    return {ordinates_.data(), static_cast<std::size_t>(end - ordinates_.begin())};
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

ZeroTable load_zeros(const std::filesystem::path& path, std::optional<std::size_t> limit, int precision_digits) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open zero table '" + path.string() + "'");

    std::vector<double> ordinates;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (limit && ordinates.size() >= *limit) break;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": malformed ordinate '" +
                                  std::string(text) + "'");
        }
        if (value <= 0.0) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": ordinates must be positive");
        }
        if (!ordinates.empty() && value <= ordinates.back()) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": ordinates must be strictly increasing");
        }
        ordinates.push_back(value);
    }
    if (ordinates.empty())
        throw ValidationError("zero table '" + path.string() + "' is empty");
    return ZeroTable(std::move(ordinates), path.stem().string(), precision_digits);
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("SHORTRACE_DATA_DIR"); env && *env)
        return env;
    return SHORTRACE_SOURCE_DATA_DIR;
}

ZeroCount count_below(const ZeroTable& table, double height) {
    if (!(height >= 0.0))
        throw ValidationError("count_below: height must be >= 0");
    return {table.up_to(height).size(), table.covers(height)};
}

double rvm_main_term(double height) {
    if (height <= 0.0) return 0.0;
    const double x = height / (2.0 * std::numbers::pi);
    return x * std::log(x) - x;
}

std::vector<RvmResidual> rvm_residuals(const ZeroTable& table, std::span<const double> grid) {
    std::vector<RvmResidual> out;
    out.reserve(grid.size());
    for (const double t : grid) {
        const auto n = count_below(table, t);
        out.push_back({t, static_cast<double>(n.count) - rvm_main_term(t), n.covered});
    }
    return out;
}

}  // namespace shortrace
