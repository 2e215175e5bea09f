#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "doctest.h"
#include "shortrace/errors.hpp"
#include "shortrace/gaussian_theory.hpp"
#include "shortrace/weights.hpp"

using namespace shortrace;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Interval> orthant(std::size_t r, bool positive) {
    return std::vector<Interval>(r, positive ? Interval{0.0, kInf} : Interval{-kInf, 0.0});
}

Eigen::MatrixXd equicorrelated(int r, double rho) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Constant(r, r, rho);
    c.diagonal().setOnes();
    return c;
}

}  // namespace

TEST_CASE("normal cdf and quantile") {
    const boost::math::normal_distribution<double> nd;
    for (double x = -8; x <= 8; x += 0.25) CHECK(normal_cdf(x) == doctest::Approx(boost::math::cdf(nd, x)).epsilon(1e-13));
    for (double p : {1e-12, 0.01, 0.3, 0.5, 0.9, 1 - 1e-9}) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
    CHECK_THROWS_AS(normal_quantile(0.0), ValidationError);
}

TEST_CASE("box probability against closed forms") {
    for (int r = 1; r <= 5; ++r) {
        const auto est = box_probability(Eigen::MatrixXd::Identity(r, r), orthant(r, false));
        CHECK(std::fabs(est.value - std::ldexp(1.0, -r)) <= std::max(1e-12, 3 * est.std_err));
    }
    const auto one = box_probability(Eigen::MatrixXd::Identity(1, 1), std::vector<Interval>{{-1.96, 1.96}});
    CHECK(one.value == doctest::Approx(0.9500042).epsilon(1e-6));
    CHECK(std::fabs(one.value - 0.95) < 1e-3);

    // Sheppard: P(X > 0, Y > 0) = 1/4 + asin(rho)/(2 pi).
    for (double rho : {-0.6, -0.1, 0.3, 0.8}) {
        const auto est = box_probability(equicorrelated(2, rho), orthant(2, true));
        CHECK(est.std_err <= 1e-4);
        CHECK(std::fabs(est.value - (0.25 + std::asin(rho) / (2 * std::numbers::pi))) <= 4 * est.std_err + 1e-12);
    }
    Eigen::MatrixXd c3(3, 3);
    c3 << 1, -0.2, 0.1, -0.2, 1, -0.3, 0.1, -0.3, 1;
    const double exact3 = 0.125 + (std::asin(-0.2) + std::asin(0.1) + std::asin(-0.3)) / (4 * std::numbers::pi);
    const auto est3 = box_probability(c3, orthant(3, true));
    CHECK(est3.std_err <= 1e-4);
    CHECK(std::fabs(est3.value - exact3) <= 4 * est3.std_err);
}

TEST_CASE("box probability properties") {
    const std::vector<Interval> box{{-1.0, 0.5}, {0.2, kInf}, {-kInf, 1.5}};
    const auto id = box_probability(Eigen::MatrixXd::Identity(3, 3), box);
    double product = 1.0;
    for (const auto& iv : box) product *= normal_cdf(iv.hi) - normal_cdf(iv.lo);
    CHECK(std::fabs(id.value - product) <= 3 * id.std_err + 1e-12);

    Eigen::MatrixXd c(3, 3);
    c << 1, 0.4, -0.2, 0.4, 1, 0.1, -0.2, 0.1, 1;
    const std::vector<Interval> sym{{-1.0, 1.0}, {-0.5, 0.5}, {-2.0, 2.0}};
    const std::array<int, 3> p{2, 0, 1};
    Eigen::MatrixXd cp(3, 3);
    std::vector<Interval> symp(3);
    for (int i = 0; i < 3; ++i) {
        symp[i] = sym[p[i]];
        for (int j = 0; j < 3; ++j) cp(i, j) = c(p[i], p[j]);
    }
    const auto a = box_probability(c, sym);
    const auto b = box_probability(cp, symp, {.seed = 9});
    CHECK(std::fabs(a.value - b.value) <= 4 * std::hypot(a.std_err, b.std_err));

    BoxOptions threaded;
    threaded.threads = 3;
    const auto t3 = box_probability(c, sym, threaded);
    CHECK(t3.value == a.value);
    CHECK(t3.std_err == a.std_err);

    Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(box_probability(singular, orthant(2, true)), ValidationError);
    CHECK_THROWS_AS(box_probability(Eigen::MatrixXd::Identity(2, 2), orthant(3, true)), ValidationError);
}

TEST_CASE("negative correlation expansion") {
    const double delta = std::exp(-10.0);
    const RaceConfig two(delta, {0.0, 1.0});
    const auto p = negcorr_expansion(two, orthant(2, true));
    CHECK(p.leading == doctest::Approx(0.25));
    CHECK(p.value == doctest::Approx(0.25 - std::log(2.0) / (20 * std::numbers::pi)).epsilon(1e-14));
    CHECK(std::fabs(p.value - 0.238968) < 1e-6);
    CHECK(negcorr_expansion(two, orthant(2, false)).value == doctest::Approx(p.value).epsilon(1e-15));

    const RaceConfig four(delta, {0.0, 1.0, 3.0, 7.0});
    double sum_delta = 0;
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t k = j + 1; k < 4; ++k)
            sum_delta += delta_repulsion(std::fabs(four.shift(j) - four.shift(k)));
    for (bool positive : {true, false}) {
        const auto q = negcorr_expansion(four, orthant(4, positive));
        CHECK(q.correction <= 0);
        CHECK(q.value == doctest::Approx(1.0 / 16 - 0.25 * sum_delta / (2 * std::numbers::pi * 10)).epsilon(1e-13));
    }
    const std::vector<Interval> degenerate{{0.3, 0.3}, {-1.0, 1.0}};
    CHECK(negcorr_expansion(two, degenerate).value == 0.0);
    const std::vector<Interval> whole{{-kInf, kInf}, {-kInf, kInf}};
    CHECK(negcorr_expansion(two, whole).value == 1.0);
    CHECK_THROWS_AS(negcorr_expansion(RaceConfig(0.01, {0, 1, 2, 3, 4, 5, 6, 7, 8}), orthant(9, true)),
                    ValidationError);
}

TEST_CASE("order statistic moments") {
    CHECK(std::fabs(order_statistic_product(2, 1, 2)) < 1e-12);
    CHECK(order_statistic_product(3, 1, 2) == doctest::Approx(std::sqrt(3.0) / (2 * std::numbers::pi)).epsilon(1e-10));
    CHECK(order_statistic_product(3, 2, 3) == doctest::Approx(std::sqrt(3.0) / (2 * std::numbers::pi)).epsilon(1e-10));
    CHECK(order_statistic_product(3, 1, 3) == doctest::Approx(-std::sqrt(3.0) / std::numbers::pi).epsilon(1e-10));
    CHECK(order_statistic_product(3, 3, 1) == order_statistic_product(3, 1, 3));
    // sum_{i != l} E[X_(i) X_(l)] = E[(sum x)^2] - E[sum x^2] = 0
    for (std::size_t r = 2; r <= 6; ++r) {
        double total = 0;
        for (std::size_t i = 1; i <= r; ++i)
            for (std::size_t l = i + 1; l <= r; ++l) total += order_statistic_product(r, i, l);
        CHECK(std::fabs(total) < 1e-10);
    }
    // Monte Carlo over sorted normals for r = 5.
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    const int n = 400000;
    double s = 0, s2 = 0;
    std::array<double, 5> x{};
    for (int m = 0; m < n; ++m) {
        for (auto& v : x) v = nd(gen);
        std::sort(x.begin(), x.end(), std::greater<>());
        const double v = x[1] * x[3];
        s += v;
        s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::fabs(order_statistic_product(5, 2, 4) - mean) <= 5 * se);
    CHECK_THROWS_AS(order_statistic_product(3, 2, 2), ValidationError);
}

TEST_CASE("ordering predictions") {
    const double delta = std::exp(-10.0);
    const RaceConfig three(delta, {-1.0, 0.0, 1.0});
    const auto desc = ordering_prediction(three);
    CHECK(std::fabs(desc.value - (1.0 / 6 - 0.039652 / 10)) < 1e-6);
    CHECK(std::fabs(desc.value - 0.162701) < 1e-6);
    CHECK(desc.correction < 0);
    const double closed = (std::log(4.0) - std::log(3.0)) * std::sqrt(3.0) / (4 * std::numbers::pi);
    CHECK(std::fabs(desc.correction * 10 + closed) < 1e-4);

    std::vector<std::size_t> perm{0, 1, 2};
    double total = 0;
    int plus = 0;
    do {
        const auto p = ordering_prediction(three, perm);
        total += p.value;
        if (std::fabs(p.value - (1.0 / 6 + 0.019826 / 10)) < 1e-6) ++plus;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(std::fabs(total - 1) < 1e-6);
    CHECK(plus == 4);
    const std::vector<std::size_t> asc{2, 1, 0};
    CHECK(ordering_prediction(three, asc).value == doctest::Approx(desc.value).epsilon(1e-12));

    const RaceConfig four(0.01, {0.0, 1.0, 2.5, 4.0});
    std::vector<std::size_t> p4{0, 1, 2, 3};
    total = 0;
    do total += ordering_prediction(four, p4).value;
    while (std::next_permutation(p4.begin(), p4.end()));
    CHECK(std::fabs(total - 1) < 1e-6);

    const std::vector<std::size_t> bad{0, 0, 1};
    CHECK_THROWS_AS(ordering_prediction(three, bad), ValidationError);
    CHECK_THROWS_AS(ordering_prediction(RaceConfig(0.01, {0, 1, 2, 3, 4, 5, 6})), ValidationError);
}

TEST_CASE("top-s predictions") {
    const RaceConfig four(std::exp(-12.0), {0.0, 1.0, 2.0, 3.0});
    const std::vector<std::size_t> full{3, 1, 0, 2};
    CHECK(top_s_prediction(four, full).value == doctest::Approx(ordering_prediction(four, full).value).epsilon(1e-12));
    const std::vector<std::size_t> full3{3, 1, 0};
    CHECK(top_s_prediction(four, full3).value == doctest::Approx(ordering_prediction(four, full).value).epsilon(1e-12));
    double total = 0;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            if (a != b) {
                const std::vector<std::size_t> prefix{a, b};
                const auto p = top_s_prediction(four, prefix);
                CHECK(p.leading == doctest::Approx(1.0 / 12));
                total += p.value;
            }
    CHECK(std::fabs(total - 1) < 1e-6);
    const RaceConfig two(0.01, {0.0, 1.0});
    const std::vector<std::size_t> first{0};
    CHECK(std::fabs(top_s_prediction(two, first).value - 0.5) < 1e-12);
}

TEST_CASE("large deviation prediction") {
    CHECK(large_deviation_prediction(3, 0.0).value == 1.0);
    CHECK(std::fabs(large_deviation_prediction(1, 1.96).value - 0.05) < 1e-5);
    CHECK(large_deviation_prediction(1, 1.96).value == doctest::Approx(2 * normal_cdf(-1.96)).epsilon(1e-12));
    CHECK(large_deviation_prediction(2, 1.7).value == doctest::Approx(std::exp(-1.7 * 1.7 / 2)).epsilon(1e-12));
    CHECK(large_deviation_prediction(2, 1.7).correction == 0.0);

    std::mt19937_64 gen(8);
    std::normal_distribution<double> nd;
    const int n = 200000;
    int hits = 0;
    for (int m = 0; m < n; ++m) {
        const double a = nd(gen), b = nd(gen), c = nd(gen);
        hits += (a * a + b * b + c * c > 4.0);
    }
    const double p = static_cast<double>(hits) / n;
    CHECK(std::fabs(large_deviation_prediction(3, 2.0).value - p) <= 4 * std::sqrt(p * (1 - p) / n));
    CHECK_THROWS_AS(large_deviation_prediction(2, -1.0), ValidationError);
}

TEST_CASE("density comparison") {
    const std::vector<double> x{0.7, -1.2, 2.0};
    CHECK(density_comparison(Eigen::MatrixXd::Identity(3, 3), x).ratio == 1.0);

    auto worst_at = [](double delta) {
        const auto c = asymptotic_correlation(RaceConfig(delta, {0.0, 1.0})).entries;
        double worst = 0;
        for (double a = -3; a <= 3; a += 0.25)
            for (double b = -3; b <= 3; b += 0.25) {
                if (a * a + b * b > 9) continue;
                const std::vector<double> v{a, b};
                const auto d = density_comparison(c, v);
                CHECK(d.ratio == doctest::Approx(d.approx / d.exact).epsilon(1e-12));
                worst = std::max(worst, std::fabs(d.ratio - 1));
            }
        return worst;
    };
    const double w10 = worst_at(std::exp(-10.0)), w20 = worst_at(std::exp(-20.0)), w40 = worst_at(std::exp(-40.0));
    CHECK(w20 <= 0.05);
    CHECK(w10 > w20);
    CHECK(w20 > w40);
    CHECK_THROWS_AS(density_comparison(Eigen::MatrixXd::Ones(2, 2), std::vector<double>{1.0, 1.0}), ValidationError);
}
