#pragma once

#include <Eigen/Dense>
#include <span>

#include "shortrace/race_config.hpp"
#include "shortrace/zero_table.hpp"

namespace shortrace {

struct CovarianceReport {
    RaceConfig config;
    Eigen::MatrixXd numeric;     // 2 sum_{0<gamma<=height} Re(w_j conj w_k)
    Eigen::MatrixXd asymptotic;  // empty when delta > 0.1
    double truncation_height = 0.0;
    double tail_estimate = 0.0;  // 3 log(h)/h, reported, never added
    std::size_t zero_count = 0;
};

// 2 sum Re(w_j(rho) conj w_k(rho)) over the given ordinates, ascending,
// with compensated sums. Chunks of ordinates may run on several threads;
// partial sums are merged in chunk order.
Eigen::MatrixXd covariance_sum(const RaceConfig& config, std::span<const double> gammas, unsigned threads = 1);

// Throws CoverageError when height exceeds the table.
CovarianceReport covariance_numeric(const RaceConfig& config, const ZeroTable& zeros, double height,
                                    unsigned threads = 1);

// Diagonal delta log(1/delta) + (1 - gamma_E - log 2pi) delta, off-diagonal
// -Delta(|t_j - t_k|) delta. Requires delta <= 0.1.
Eigen::MatrixXd covariance_asymptotic(const RaceConfig& config);

// Expected contribution of zeros above `height`, replacing the sum by an
// integral against the zero density log(gamma/2pi)/2pi.
Eigen::MatrixXd covariance_tail_integral(const RaceConfig& config, double height);

struct CorrelationMatrix {
    Eigen::MatrixXd entries;
    double min_eigenvalue = 0.0;
    bool positive_semidefinite = true;  // min eigenvalue >= -1e-10
};

CorrelationMatrix correlation_matrix(const Eigen::MatrixXd& cov);

struct AlmostIdentityStats {
    double det = 0.0;
    Eigen::MatrixXd inverse;
    double off_diagonal_square_sum = 0.0;  // sum_{j != k} a_jk^2
    bool det_lower_ok = false;             // det >= 3/8
    bool det_deviation_ok = false;         // |det - 1| <= 4 sum_{j != k} a_jk^2
    bool bound_ok = false;
};

// A must have unit diagonal and |a_jk| <= epsilon <= 1/(2r).
AlmostIdentityStats almost_identity_stats(const Eigen::MatrixXd& a, double epsilon);

struct MellinCheck {
    double quadrature = 0.0;
    double closed_form = 0.0;
    double abs_err = 0.0;
};

// int_0^inf (sin(kappa x)/x)^2 log x dx against (pi/2)|kappa|(1 - gamma_E - log 2|kappa|).
MellinCheck mellin_check(double kappa);

}  // namespace shortrace
