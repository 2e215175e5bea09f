#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shortrace/psi_sieve.hpp"
#include "shortrace/race_config.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace {

struct ExplicitResult {
    double x = 0.0;
    double value = 0.0;
    double truncation_height = 0.0;
    double predicted_error = 0.0;  // sqrt(x) log^2(xZ)/Z + log x/sqrt(x)
};

double explicit_error_envelope(double x, double height);

// -2 sum Re(weights[i] e^{i gammas[i] log x}), ascending, compensated.
double explicit_sum(double x, std::span<const double> gammas, std::span<const std::complex<double>> weights);

// The same sum over +-gamma without pairing conjugates; its imaginary part
// is rounding noise.
std::complex<double> explicit_sum_unpaired(double x, std::span<const double> gammas,
                                           std::span<const std::complex<double>> weights);

// Truncated explicit formula for E(x; delta, t_j) with zeros 0 < gamma <= Z.
// Weights are computed once per coordinate.
class ExplicitFormula {
public:
    // Throws CoverageError when Z exceeds the table.
    ExplicitFormula(const RaceConfig& config, const ZeroTable& zeros, double height);

    const RaceConfig& config() const noexcept { return config_; }
    double height() const noexcept { return height_; }
    std::size_t zero_count() const noexcept { return gammas_.size(); }
    const std::string& source_id() const noexcept { return source_id_; }

    // Requires x >= 2.
    ExplicitResult deviation(double x, std::size_t j) const;

private:
    RaceConfig config_;
    double height_;
    std::string source_id_;
    std::span<const double> gammas_;
    std::vector<std::vector<std::complex<double>>> weights_;
};

ExplicitResult deviation_explicit(double x, const RaceConfig& config, std::size_t j, const ZeroTable& zeros,
                                  double height);

struct SurveySample {
    double x = 0.0;
    double sieve = 0.0;
    double explicit_value = 0.0;
};

struct ResidualSurvey {
    std::vector<SurveySample> samples;  // coordinate 0 of the config
    double rms = 0.0;                   // RMS of sieve - explicit
    double corr = 0.0;                  // Pearson correlation
    double min_envelope = 0.0;          // smallest predicted_error over the samples
};

// x = e^u with u uniform on [log x_lo, log x_hi], draw i from Philox stream 0,
// counter i. Sieve values come from `psi`. Throws ValidationError when the
// correlation is undefined (a constant series, e.g. Z below the first zero).
ResidualSurvey residual_survey(double x_lo, double x_hi, const RaceConfig& config, const ZeroTable& zeros,
                               const PsiTable& psi, double height, std::size_t n, std::uint64_t seed,
                               unsigned threads = 1);

}  // namespace shortrace
