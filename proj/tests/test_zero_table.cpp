#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "shortrace/errors.hpp"
#include "shortrace/zero_table.hpp"

using namespace shortrace;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path;
}

const ZeroTable& fixture() {
    static const ZeroTable table = load_zeros(default_data_dir() / "zeros_1k.txt");
    return table;
}

}  // namespace

TEST_CASE("load_zeros parses a small file") {
    const auto path = write_temp("sr_two.txt", "14.134725142\n21.022039639\n");
    const auto table = load_zeros(path);
    CHECK(table.size() == 2);
    CHECK(table[0] == doctest::Approx(14.134725).epsilon(1e-7));
    CHECK(table.source_id() == "sr_two");
}

TEST_CASE("load_zeros rejects bad input") {
    CHECK_THROWS_AS(load_zeros(write_temp("sr_desc.txt", "21.0\n14.1\n")), ValidationError);
    CHECK_THROWS_AS(load_zeros(write_temp("sr_empty.txt", "")), ValidationError);
    CHECK_THROWS_AS(load_zeros(write_temp("sr_dup.txt", "14.1347\n14.1347\n")), ValidationError);
    CHECK_THROWS_AS(load_zeros(write_temp("sr_neg.txt", "-3\n")), ValidationError);
    CHECK_THROWS_AS(load_zeros(write_temp("sr_nofirst.txt", "21.02\n25.01\n")), ValidationError);
    CHECK_THROWS_AS(load_zeros("/nonexistent/zeros.txt"), ValidationError);
    try {
        load_zeros(write_temp("sr_bad.txt", "14.1347\nabc\n"));
        FAIL("expected throw");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
}

TEST_CASE("limit truncates") {
    const auto table = load_zeros(default_data_dir() / "zeros_1k.txt", 10);
    CHECK(table.size() == 10);
}

TEST_CASE("count_below") {
    const auto& t = fixture();
    CHECK(t.size() == 1000);
    CHECK(count_below(t, 10).count == 0);
    CHECK(count_below(t, 100).count == 29);
    CHECK(std::fabs(29 - rvm_main_term(100)) <= 2 * std::log(102.0));
    CHECK(rvm_main_term(100) == doctest::Approx(28.127).epsilon(1e-3));
    for (std::size_t n = 1; n <= t.size(); n += 37) CHECK(count_below(t, t[n - 1]).count == n);
    CHECK_FALSE(count_below(t, 1e6).covered);
    CHECK_THROWS_AS(count_below(t, -1), ValidationError);
}

TEST_CASE("rvm residuals bounded") {
    const auto& t = fixture();
    std::vector<double> grid;
    for (double h = 50; h <= 500; h += 50) grid.push_back(h);
    for (const auto& r : rvm_residuals(t, grid)) CHECK(std::fabs(r.residual) <= 3 * std::log(r.height + 2));
    const double below = t[0] - 1e-6;
    const auto r = rvm_residuals(t, std::vector<double>{below});
    CHECK(r[0].residual == -rvm_main_term(below));
    CHECK(rvm_residuals(t, std::vector<double>{100})[0].residual == doctest::Approx(0.87).epsilon(0.01));
}
