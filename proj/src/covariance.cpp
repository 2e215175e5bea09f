#include "shortrace/covariance.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "shortrace/errors.hpp"
#include "shortrace/parallel.hpp"
#include "shortrace/summation.hpp"
#include "shortrace/weights.hpp"

namespace shortrace {

namespace {

constexpr std::size_t kZeroChunk = 4096;
constexpr double kPi = std::numbers::pi;

using boost::math::quadrature::gauss_kronrod;

}  // namespace

Eigen::MatrixXd covariance_sum(const RaceConfig& config, std::span<const double> gammas, unsigned threads) {
    const std::size_t r = config.r();
    const std::size_t n_chunks = (gammas.size() + kZeroChunk - 1) / kZeroChunk;
    std::vector<std::vector<CompensatedSum>> partial(n_chunks, std::vector<CompensatedSum>(r * r));

    for_each_chunk(n_chunks, threads, [&](std::size_t c) {
        auto& acc = partial[c];
        std::vector<std::complex<double>> w(r);
        const std::size_t end = std::min(gammas.size(), (c + 1) * kZeroChunk);
        for (std::size_t i = c * kZeroChunk; i < end; ++i) {
            for (std::size_t j = 0; j < r; ++j) w[j] = weight_at_zero(gammas[i], config.delta(), config.shift(j));
            for (std::size_t j = 0; j < r; ++j)
                for (std::size_t k = j; k < r; ++k) acc[j * r + k].add(2.0 * std::real(w[j] * std::conj(w[k])));
        }
    });

    Eigen::MatrixXd out(r, r);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = j; k < r; ++k) {
            CompensatedSum total;
            for (const auto& chunk : partial) total.merge(chunk[j * r + k]);
            out(j, k) = out(k, j) = total.value();
        }
    }
    return out;
}

CovarianceReport covariance_numeric(const RaceConfig& config, const ZeroTable& zeros, double height,
                                    unsigned threads) {
    if (!(height > 0.0)) throw ValidationError("covariance: height must be positive");
    if (!zeros.covers(height)) {
        std::ostringstream msg;
        msg << "covariance: height " << height << " exceeds zero table '" << zeros.source_id() << "' (max "
            << zeros.max_height() << ")";
        throw CoverageError(msg.str());
    }
    const auto gammas = zeros.up_to(height);
    CovarianceReport report{config, covariance_sum(config, gammas, threads), {}, height,
                            3.0 * std::log(height) / height, gammas.size()};
    if (config.delta() <= 0.1) report.asymptotic = covariance_asymptotic(config);
    return report;
}

Eigen::MatrixXd covariance_asymptotic(const RaceConfig& config) {
    const double d = config.delta();
    if (d > 0.1) throw ValidationError("covariance_asymptotic: need delta <= 0.1");
    const std::size_t r = config.r();
    Eigen::MatrixXd out(r, r);
    const double diag = d * std::log(1.0 / d) + (1.0 - kEulerGamma - std::log(2.0 * kPi)) * d;
    for (std::size_t j = 0; j < r; ++j) {
        out(j, j) = diag;
        for (std::size_t k = j + 1; k < r; ++k)
            out(j, k) = out(k, j) = -delta_repulsion(std::fabs(config.shift(j) - config.shift(k))) * d;
    }
    return out;
}

namespace {

double zero_density(double gamma) { return std::log(gamma / (2.0 * kPi)) / (2.0 * kPi); }

// int_H^inf cos(omega g) density(g) / (1/4 + g^2) dg
double tail_kernel_integral(double omega, double height) {
    omega = std::fabs(omega);
    if (omega == 0.0) {
        // g = H / v maps (H, inf) onto (0, 1]
        auto f = [height](double v) { return zero_density(height / v) * height / (0.25 * v * v + height * height); };
        return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 20, 1e-13);
    }
    thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_integrator(1e-11, 10);
    thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_integrator(1e-11, 10);
    auto g = [height](double u) {
        const double x = height + u;
        return zero_density(x) / (0.25 + x * x);
    };
    const double c = cos_integrator.integrate(g, omega).first;
    const double s = sin_integrator.integrate(g, omega).first;
    return std::cos(omega * height) * c - std::sin(omega * height) * s;
}

}  // namespace

Eigen::MatrixXd covariance_tail_integral(const RaceConfig& config, double height) {
    if (!(height > 2.0 * kPi)) throw ValidationError("covariance_tail_integral: height must exceed 2pi");
    const std::size_t r = config.r();
    std::vector<double> upper(r), lower(r);
    for (std::size_t j = 0; j < r; ++j) {
        upper[j] = 1.0 + (config.shift(j) + 0.5) * config.delta();
        lower[j] = 1.0 + (config.shift(j) - 0.5) * config.delta();
    }
    // |rho|^2 = 1/4 + g^2 and a^rho conj(b^rho) = sqrt(ab) e^{i g log(a/b)}
    Eigen::MatrixXd out(r, r);
    for (std::size_t j = 0; j < r; ++j) {
        for (std::size_t k = j; k < r; ++k) {
            const double ends_j[2] = {upper[j], lower[j]};
            const double ends_k[2] = {upper[k], lower[k]};
            double total = 0.0;
            for (int p = 0; p < 2; ++p) {
                for (int q = 0; q < 2; ++q) {
                    const double sign = p == q ? 1.0 : -1.0;
                    const double omega = std::log(ends_j[p] / ends_k[q]);
                    total += sign * std::sqrt(ends_j[p] * ends_k[q]) * tail_kernel_integral(omega, height);
                }
            }
            out(j, k) = out(k, j) = 2.0 * total;
        }
    }
    return out;
}

CorrelationMatrix correlation_matrix(const Eigen::MatrixXd& cov) {
    const auto r = cov.rows();
    if (r == 0 || cov.cols() != r) throw ValidationError("correlation_matrix: need a square matrix");
    for (Eigen::Index j = 0; j < r; ++j)
        if (!(cov(j, j) > 0.0)) throw ValidationError("correlation_matrix: nonpositive variance");
    CorrelationMatrix out;
    out.entries.resize(r, r);
    for (Eigen::Index j = 0; j < r; ++j) {
        out.entries(j, j) = 1.0;
        for (Eigen::Index k = j + 1; k < r; ++k)
            out.entries(j, k) = out.entries(k, j) = cov(j, k) / std::sqrt(cov(j, j) * cov(k, k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.entries, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    out.positive_semidefinite = out.min_eigenvalue >= -1e-10;
    return out;
}

AlmostIdentityStats almost_identity_stats(const Eigen::MatrixXd& a, double epsilon) {
    const auto r = a.rows();
    if (r == 0 || a.cols() != r) throw ValidationError("almost_identity_stats: need a square matrix");
    if (!(epsilon >= 0.0 && epsilon <= 1.0 / (2.0 * static_cast<double>(r))))
        throw ValidationError("almost_identity_stats: need 0 <= epsilon <= 1/(2r)");
    AlmostIdentityStats out;
    for (Eigen::Index j = 0; j < r; ++j) {
        if (a(j, j) != 1.0) throw ValidationError("almost_identity_stats: diagonal must be 1");
        for (Eigen::Index k = 0; k < r; ++k) {
            if (j == k) continue;
            if (std::fabs(a(j, k)) > epsilon)
                throw ValidationError("almost_identity_stats: off-diagonal entry exceeds epsilon");
            out.off_diagonal_square_sum += a(j, k) * a(j, k);
        }
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    out.det = lu.determinant();
    out.inverse = lu.inverse();
    out.det_lower_ok = out.det >= 3.0 / 8.0;
    out.det_deviation_ok = std::fabs(out.det - 1.0) <= 4.0 * out.off_diagonal_square_sum;
    out.bound_ok = out.det_lower_ok && out.det_deviation_ok;
    return out;
}

MellinCheck mellin_check(double kappa) {
    if (kappa == 0.0 || !std::isfinite(kappa)) throw ValidationError("mellin_check: need finite kappa != 0");
    const double k = std::fabs(kappa);
    const double split = 1.0 / k;

    auto head = [k](double x) {
        const double s = std::sin(k * x) / x;
        return s * s * std::log(x);
    };
    // log singularity at 0: double-exponential nodes cluster there
    boost::math::quadrature::tanh_sinh<double> endpoint_rule;
    const double near = endpoint_rule.integrate(head, 0.0, split, 1e-14);

    // sin^2 = (1 - cos 2kx)/2; the non-oscillatory half is (log A + 1)/(2A)
    const double smooth = 0.5 * (std::log(split) + 1.0) / split;
    auto osc = [k](double x) { return std::cos(2.0 * k * x) * std::log(x) / (x * x); };
    const double half_period = kPi / (2.0 * k);
    CompensatedSum tail;
    double previous = 0.0;
    double current = 0.0;
    double a = split;
    for (int block = 0; block < 10'000'000; ++block) {
        const double piece = boost::math::quadrature::gauss<double, 20>::integrate(osc, a, a + half_period);
        tail.add(piece);
        a += half_period;
        previous = current;
        current = tail.value();
        if (std::fabs(piece) < 1e-9 && a > std::exp(1.0) && block > 2) break;
    }
    const double oscillatory = 0.5 * (previous + current);

    MellinCheck out;
    out.quadrature = near + smooth - 0.5 * oscillatory;
    out.closed_form = 0.5 * kPi * k * (1.0 - kEulerGamma - std::log(2.0 * k));
    out.abs_err = std::fabs(out.quadrature - out.closed_form);
    return out;
}

}  // namespace shortrace
