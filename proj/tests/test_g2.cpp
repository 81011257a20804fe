#include "specdiff/error.hpp"
#include "specdiff/g2.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace specdiff;

namespace {

void curve(double g0, double tau, std::vector<double>& t, std::vector<double>& y, double sigma = 0.0,
           std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma > 0.0 ? sigma : 1.0);
    t.clear();
    y.clear();
    for (int i = 0; i < 50; ++i) {
        t.push_back((-25 + i) * 2e-9);
        y.push_back(1.0 - (1.0 - g0) * std::exp(-std::abs(t.back()) / tau) + (sigma > 0.0 ? g(rng) : 0.0));
    }
}

}  // namespace

TEST_CASE("exact antibunching curve is recovered") {
    std::vector<double> t, y;
    curve(0.3, 10e-9, t, y);
    const auto fit = g2::fit_g2(t, y);
    CHECK(fit.converged);
    CHECK(fit.g2_0 == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(fit.tau_antibunch == doctest::Approx(10e-9).epsilon(1e-6));
    CHECK(fit.g2_inf == 1.0);
}

TEST_CASE("model value at zero delay is g2_0") {
    CHECK(g2::antibunching(0.0, 0.27, 3e-9) == 0.27);
    CHECK(g2::antibunching(-4e-9, 0.27, 3e-9) == g2::antibunching(4e-9, 0.27, 3e-9));
}

TEST_CASE("noisy curve is recovered within five percent") {
    std::vector<double> t, y;
    curve(0.3, 10e-9, t, y, 0.02, 7);
    const auto fit = g2::fit_g2(t, y);
    CHECK(fit.g2_0 == doctest::Approx(0.3).epsilon(0.05));
    CHECK(fit.tau_antibunch == doctest::Approx(10e-9).epsilon(0.05));
}

TEST_CASE("time reversal of delays leaves the fit unchanged") {
    std::vector<double> t, y;
    curve(0.2, 5e-9, t, y, 0.02, 3);
    const auto a = g2::fit_g2(t, y);
    std::vector<double> tr;
    for (double v : t) tr.push_back(-v);
    const auto b = g2::fit_g2(tr, y);
    CHECK(a.g2_0 == doctest::Approx(b.g2_0).epsilon(1e-9));
    CHECK(a.tau_antibunch == doctest::Approx(b.tau_antibunch).epsilon(1e-9));
}

TEST_CASE("g2 input errors") {
    CHECK_THROWS_AS(g2::fit_g2(std::vector<double>{0, 1, 2}, std::vector<double>{0.5, 0.8, 0.9}), Error);
    CHECK_THROWS_AS(g2::fit_g2(std::vector<double>{0, 1, 2, 3}, std::vector<double>{0.5, 0.5, 0.5, 0.5}), Error);
}
