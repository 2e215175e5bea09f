#include "shortrace/race_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "shortrace/errors.hpp"

namespace shortrace {

RaceConfig::RaceConfig(double delta, std::vector<double> shifts) : delta_(delta), shifts_(std::move(shifts)) {
    if (!(delta_ > 0.0 && delta_ <= 0.25)) {
        std::ostringstream msg;
        msg << "delta must lie in (0, 1/4], got " << delta_;
        throw ValidationError(msg.str());
    }
    if (shifts_.empty())
        throw ValidationError("at least one shift is required");
    for (const double t : shifts_) {
        if (!std::isfinite(t))
            throw ValidationError("shifts must be finite");
    }
    for (std::size_t j = 0; j < shifts_.size(); ++j) {
        for (std::size_t k = j + 1; k < shifts_.size(); ++k) {
            if (std::fabs(shifts_[j] - shifts_[k]) < 1.0) {
                std::ostringstream msg;
                msg << "intervals overlap: |t_" << j + 1 << " - t_" << k + 1
                    << "| = " << std::fabs(shifts_[j] - shifts_[k]) << " < 1";
                throw ValidationError(msg.str());
            }
        }
    }
    for (const double t : shifts_) {
        if (!(1.0 + (t - 0.5) * delta_ > 0.0))
            throw ValidationError("interval endpoints must stay positive: need 1 + (t - 1/2) delta > 0");
    }
}

double RaceConfig::t_max() const noexcept {
    double m = 0.0;
    for (const double t : shifts_) m = std::max(m, std::fabs(t));
    return 1.0 + m;
}

double RaceConfig::lower(double x, std::size_t j) const noexcept {
    return (1.0 + shifts_[j] * delta_) * x - 0.5 * delta_ * x;
}

double RaceConfig::upper(double x, std::size_t j) const noexcept {
    return (1.0 + shifts_[j] * delta_) * x + 0.5 * delta_ * x;
}

bool RaceConfig::admissible_at(double x) const noexcept {
    for (std::size_t j = 0; j < shifts_.size(); ++j) {
        if (!(lower(x, j) >= 2.0 && upper(x, j) <= 2.0 * x)) return false;
    }
    return true;
}

void RaceConfig::require_admissible(double x) const {
    if (!admissible_at(x)) {
        std::ostringstream msg;
        msg << "configuration " << describe(*this) << " is not admissible at x = " << x
            << " (need 2 <= lower endpoint and upper endpoint <= 2x)";
        throw ValidationError(msg.str());
    }
}

RaceConfig RaceConfig::select(std::span<const std::size_t> indices) const {
    std::vector<double> picked;
    picked.reserve(indices.size());
    for (const auto i : indices) picked.push_back(shifts_.at(i));
    return RaceConfig(delta_, std::move(picked));
}

std::vector<double> parse_csv_reals(std::string_view text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        auto field = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
        while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
        if (!field.empty() && field.front() == '+') field.remove_prefix(1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size())
            throw ValidationError("malformed number '" + std::string(field) + "' in list '" + std::string(text) + "'");
        out.push_back(value);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string describe(const RaceConfig& config) {
    std::ostringstream s;
    s << "(delta=" << config.delta() << ", t=[";
    for (std::size_t j = 0; j < config.r(); ++j) s << (j ? "," : "") << config.shift(j);
    s << "])";
    return s.str();
}

}  // namespace shortrace
