#include <cmath>
#include <numbers>

#include "doctest.h"
#include "shortrace/covariance.hpp"
#include "shortrace/errors.hpp"
#include "shortrace/event.hpp"
#include "shortrace/phasor.hpp"
#include "shortrace/random_model.hpp"
#include "shortrace/rng.hpp"

using namespace shortrace;

namespace {

const ZeroTable& zeros_10k() {
    static const ZeroTable table = load_zeros(default_data_dir() / "zeros_100k.txt", 10000);
    return table;
}

const ZeroTable& fixture() {
    static const ZeroTable table = load_zeros(default_data_dir() / "zeros_1k.txt");
    return table;
}

}  // namespace

TEST_CASE("philox known answers") {
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    std::array<C, 4> batch{C{1, 2, 3, 4}, C{5, 6, 7, 8}, C{0, 0, 0, 0}, C{9, 9, 9, 9}};
    const auto copy = batch;
    Philox4x32::generate4(batch, {17, 23});
    for (int i = 0; i < 4; ++i) CHECK(batch[i] == Philox4x32::generate(copy[i], {17, 23}));
}

TEST_CASE("unit phasor matches libm") {
    const auto& ph = UnitPhasor::instance();
    double worst = 0;
    for (std::uint64_t k = 0; k < 200000; ++k) {
        const auto w = static_cast<std::uint32_t>(k * 2654435761u + 12345u);
        const auto [c, s] = ph(w);
        const double a = 2 * std::numbers::pi * (static_cast<double>(w) / 4294967296.0);
        worst = std::max({worst, std::fabs(c - std::cos(a)), std::fabs(s - std::sin(a))});
        const double u = static_cast<double>(k) / 200000.0;
        const auto [c2, s2] = ph(u);
        worst = std::max({worst, std::fabs(c2 - std::cos(2 * std::numbers::pi * u)),
                          std::fabs(s2 - std::sin(2 * std::numbers::pi * u))});
    }
    CHECK(worst < 1e-15);
}

TEST_CASE("counter rng uniforms") {
    const CounterRng rng(42);
    double sum = 0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const auto u = rng.uniform_pair(3, i);
        REQUIRE(u[0] >= 0);
        REQUIRE(u[0] < 1);
        sum += u[0] + u[1];
    }
    CHECK(std::fabs(sum / 200000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 200000));
    double block[8];
    rng.uniform_block(10, 99, block);
    for (int i = 0; i < 4; ++i) {
        const auto u = rng.uniform_pair(10 + i, 99);
        CHECK(block[2 * i] == u[0]);
        CHECK(block[2 * i + 1] == u[1]);
    }
}

TEST_CASE("model moments match zero sums") {
    const RaceConfig cfg(1e-2, {0.0, 1.0});
    ModelOptions opt;
    opt.height = 5000;
    const RandomModel model(cfg, zeros_10k(), opt);
    const auto batch = sample(model, 40000, 7);
    const auto mom = sample_moments(batch);
    const auto cov = covariance_numeric(cfg, zeros_10k(), 5000).numeric;
    CHECK(model.explicit_covariance() == cov);
    for (int j = 0; j < 2; ++j) CHECK(std::fabs(mom.mean(j)) <= 4 * std::sqrt(cov(j, j) / 40000));
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::fabs(mom.covariance(j, k) - cov(j, k)) <= 5 * mom.covariance_std_err(j, k));
    CHECK(mom.covariance(0, 1) < 0);
}

TEST_CASE("draws are reproducible and thread independent") {
    const RaceConfig cfg(1e-2, {-1.0, 0.0, 1.0});
    ModelOptions one;
    one.height = 1400;
    ModelOptions three = one;
    three.threads = 3;
    const auto a = sample(RandomModel(cfg, fixture(), one), 50000, 11);
    const auto b = sample(RandomModel(cfg, fixture(), three), 50000, 11);
    CHECK(a.draws == b.draws);
    CHECK(sample(RandomModel(cfg, fixture(), one), 50000, 11).draws == a.draws);
    CHECK(sample(RandomModel(cfg, fixture(), one), 100, 12).draws != std::vector<double>(a.draws.begin(), a.draws.begin() + 300));
    const auto e1 = estimate_ordering(RandomModel(cfg, fixture(), one), 50000, 11);
    const auto e3 = estimate_ordering(RandomModel(cfg, fixture(), three), 50000, 11);
    CHECK(e1.p_hat == e3.p_hat);
    CHECK(estimate_event(a, ordering_event(3)).p_hat == e1.p_hat);
}

TEST_CASE("events on a batch") {
    const RaceConfig cfg(1e-2, {0.0, 1.0});
    ModelOptions opt;
    opt.height = 1000;
    const RandomModel model(cfg, fixture(), opt);
    const auto batch = sample(model, 20000, 3);
    const auto pos = estimate_event(batch, parse_event("x1>0", 2).predicate);
    const auto neg = estimate_event(batch, parse_event("x1<=0", 2).predicate);
    CHECK(pos.p_hat + neg.p_hat == 1.0);
    CHECK(std::fabs(pos.p_hat - 0.5) <= 4 * pos.std_err);
    CHECK(pos.std_err == doctest::Approx(std::sqrt(pos.p_hat * (1 - pos.p_hat) / 20000)));
    const auto half = estimate_event(batch, parse_event("x1>x2", 2).predicate);
    CHECK(std::fabs(half.p_hat - 0.5) <= 4 * half.std_err);
    CHECK(estimate_event(batch, top_s_event(2, 2)).p_hat == estimate_event(batch, ordering_event(2)).p_hat);
    CHECK(estimate_top_s_ordering(model, 2, 5000, 1).p_hat == estimate_ordering(model, 5000, 1).p_hat);
    CHECK_THROWS_AS(estimate_top_s_ordering(model, 3, 10, 1), ValidationError);
}

TEST_CASE("characteristic function") {
    const RaceConfig cfg(1e-2, {0.0, 1.0});
    const double h = 3000;
    const std::vector<double> zero{0.0, 0.0};
    CHECK(char_fn(cfg, zeros_10k(), h, zero) == 1.0);
    ModelOptions opt;
    opt.height = h;
    const RandomModel model(cfg, zeros_10k(), opt);
    const auto batch = sample(model, 40000, 5);
    const double sd = std::sqrt(model.variances()[0]);
    for (const auto& xi : std::vector<std::vector<double>>{{3 / sd, -2 / sd}, {1 / sd, 1 / sd}, {0.5 / sd, 0}}) {
        const double exact = char_fn(cfg, zeros_10k(), h, xi);
        CHECK(std::fabs(exact) <= 1);
        const auto mc = mc_char_fn(batch, xi);
        CHECK(std::fabs(mc.mean - exact) <= 5 * mc.std_err);
    }
}

TEST_CASE("tail bound") {
    const RaceConfig cfg(1e-2, {0.0});
    ModelOptions opt;
    opt.height = 2000;
    const auto batch = sample(RandomModel(cfg, zeros_10k(), opt), 20000, 9);
    const double s = std::sqrt(1e-2 * std::log(100.0));
    CHECK(tail_bound(1, 1e-2, 3 * s) < tail_bound(1, 1e-2, 2 * s));
    CHECK(tail_bound_check(batch, 4 * s).p_hat <= 2 * std::exp(-4.0) + 3 * tail_bound_check(batch, 4 * s).std_err);
    CHECK(tail_bound_check(batch, 1e3).p_hat == 0);
    CHECK(tail_bound_check(batch, 1e3).ok);
    CHECK_THROWS_AS(tail_bound_check(batch, 0.5 * s), ValidationError);
}

TEST_CASE("gaussian tail completion") {
    static const ZeroTable table = load_zeros(default_data_dir() / "zeros_100k.txt", 20000);
    const RaceConfig cfg(1e-3, {0.0, 1.0});
    ModelOptions opt;
    opt.height = 100;
    opt.gaussian_tail = true;
    const RandomModel model(cfg, table, opt);
    CHECK(model.table_height() == doctest::Approx(table.max_height()));
    const Eigen::MatrixXd inner = covariance_sum(cfg, std::span<const double>(table.ordinates()).subspan(model.explicit_zero_count()), 1);
    const Eigen::MatrixXd expect = inner + covariance_tail_integral(cfg, model.table_height());
    CHECK((model.tail_covariance() - expect).cwiseAbs().maxCoeff() < 1e-15);
    const auto asym = covariance_asymptotic(cfg);
    const auto total = model.covariance();
    CHECK(std::fabs(total(0, 0) / asym(0, 0) - 1) < 0.01);
    CHECK(std::fabs(total(0, 1) / asym(0, 1) - 1) < 0.05);
    const auto batch = sample(model, 40000, 2);
    const auto mom = sample_moments(batch);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) CHECK(std::fabs(mom.covariance(j, k) - total(j, k)) <= 5 * mom.covariance_std_err(j, k));
}
