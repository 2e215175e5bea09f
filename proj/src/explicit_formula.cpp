#include "shortrace/explicit_formula.hpp"

#include <cmath>
#include <sstream>

#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/rng.hpp"
#include "shortrace/summation.hpp"
#include "shortrace/weights.hpp"

namespace shortrace {

double explicit_error_envelope(double x, double height) {
    if (!(height > 0.0)) return std::numeric_limits<double>::infinity();
    const double l = std::log(x * height);
    return std::sqrt(x) * l * l / height + std::log(x) / std::sqrt(x);
}

double explicit_sum(double x, std::span<const double> gammas, std::span<const std::complex<double>> weights) {
    if (gammas.size() != weights.size()) throw ValidationError("explicit_sum: size mismatch");
    const double lx = std::log(x);
    CompensatedSum sum;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double ph = gammas[i] * lx;
        sum.add(weights[i].real() * std::cos(ph) - weights[i].imag() * std::sin(ph));
    }
    return -2.0 * sum.value();
}

std::complex<double> explicit_sum_unpaired(double x, std::span<const double> gammas,
                                           std::span<const std::complex<double>> weights) {
    if (gammas.size() != weights.size()) throw ValidationError("explicit_sum: size mismatch");
    const double lx = std::log(x);
    CompensatedSum re, im;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        // rho and its conjugate: w(conj rho) = conj w(rho)
        const std::complex<double> up = weights[i] * std::polar(1.0, gammas[i] * lx);
        const std::complex<double> down = std::conj(weights[i]) * std::polar(1.0, -gammas[i] * lx);
        re.add(up.real());
        re.add(down.real());
        im.add(up.imag());
        im.add(down.imag());
    }
    return {-re.value(), -im.value()};
}

ExplicitFormula::ExplicitFormula(const RaceConfig& config, const ZeroTable& zeros, double height)
    : config_(config), height_(height), source_id_(zeros.source_id()) {
    if (!(height >= 0.0)) throw ValidationError("explicit formula: height must be >= 0");
    if (!zeros.covers(height)) {
        std::ostringstream msg;
        msg << "explicit formula: height " << height << " exceeds zero table '" << zeros.source_id() << "' (max "
            << zeros.max_height() << ")";
        throw CoverageError(msg.str());
    }
    gammas_ = zeros.up_to(height);
    weights_.resize(config.r());
    for (std::size_t j = 0; j < config.r(); ++j) {
        weights_[j].reserve(gammas_.size());
        for (const double g : gammas_) weights_[j].push_back(weight_at_zero(g, config.delta(), config.shift(j)));
    }
}

ExplicitResult ExplicitFormula::deviation(double x, std::size_t j) const {
    if (!(x >= 2.0)) throw ValidationError("explicit formula: x must be >= 2");
    if (j >= config_.r()) throw ValidationError("explicit formula: coordinate out of range");
    return {x, explicit_sum(x, gammas_, weights_[j]), height_, explicit_error_envelope(x, height_)};
}

ExplicitResult deviation_explicit(double x, const RaceConfig& config, std::size_t j, const ZeroTable& zeros,
                                  double height) {
    const RaceConfig single = config.select(std::vector<std::size_t>{j});
    return ExplicitFormula(single, zeros, height).deviation(x, 0);
}

ResidualSurvey residual_survey(double x_lo, double x_hi, const RaceConfig& config, const ZeroTable& zeros,
                               const PsiTable& psi, double height, std::size_t n, std::uint64_t seed,
                               unsigned threads) {
    if (!(x_lo >= 2.0 && x_hi > x_lo)) throw ValidationError("residual_survey: need 2 <= x_lo < x_hi");
    if (n < 2) throw ValidationError("residual_survey: need n >= 2");
    const RaceConfig single = config.select(std::vector<std::size_t>{0});
    const ExplicitFormula formula(single, zeros, height);
    const CounterRng rng(seed);
    const double u_lo = std::log(x_lo), u_hi = std::log(x_hi);

    ResidualSurvey out;
    out.samples.resize(n);
    std::vector<double> envelope(n);
    for_each_chunk(n, threads, [&](std::size_t i) {
        const double x = std::exp(u_lo + (u_hi - u_lo) * rng.uniform(0, i));
        const auto ex = formula.deviation(x, 0);
        out.samples[i] = {x, psi.deviation(x, single, 0), ex.value};
        envelope[i] = ex.predicted_error;
    });

    CompensatedSum sd, sa, sb;
    for (const auto& s : out.samples) {
        sa.add(s.sieve);
        sb.add(s.explicit_value);
        sd.add((s.sieve - s.explicit_value) * (s.sieve - s.explicit_value));
    }
    const double nn = static_cast<double>(n);
    const double ma = sa.value() / nn, mb = sb.value() / nn;
    CompensatedSum saa, sbb, sab;
    for (const auto& s : out.samples) {
        saa.add((s.sieve - ma) * (s.sieve - ma));
        sbb.add((s.explicit_value - mb) * (s.explicit_value - mb));
        sab.add((s.sieve - ma) * (s.explicit_value - mb));
    }
    out.rms = std::sqrt(sd.value() / nn);
    out.min_envelope = *std::min_element(envelope.begin(), envelope.end());
    if (!(saa.value() > 0.0 && sbb.value() > 0.0))
        throw ValidationError("residual_survey: correlation undefined (constant series)");
    out.corr = sab.value() / std::sqrt(saa.value() * sbb.value());
    return out;
}

}  // namespace shortrace
