#include "specdiff/error.hpp"
#include "specdiff/eval.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace specdiff;
using namespace specdiff::eval;
using forecast::ModelKind;

TEST_CASE("wavelength differences convert to GHz") {
    // c |Δλ| / (λa λb) by hand for a 1 nm gap at 540 nm.
    const double expect = kSpeedOfLight * 1e-9 / (540e-9 * 541e-9) / 1e9;
    CHECK(shift_to_frequency(540.0, 541.0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(shift_to_frequency(541.0, 540.0) == shift_to_frequency(540.0, 541.0));
    CHECK(shift_to_frequency(539.55, 539.55) == 0.0);
    CHECK(shift_to_frequency(539.2619, 539.5476) == doctest::Approx(294.0).epsilon(2.0 / 294.0));
    CHECK_THROWS_AS(shift_to_frequency(0.0, 540.0), Error);
    CHECK_THROWS_AS(shift_to_frequency(-540.0, 540.0), Error);
    CHECK_THROWS_AS(shift_to_frequency(400.0, 540.0), Error);
}

TEST_CASE("mismatch rows compare steps and predictions") {
    const std::vector<double> actual{550.0948, 550.0, 550.0, 550.05};
    const std::vector<double> predicted{549.9553, 550.0, 550.01};
    const auto rows = mismatch_improvement(actual, predicted);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].step == 1);
    CHECK(rows[0].actual_ghz == doctest::Approx(shift_to_frequency(550.0948, 550.0)));
    CHECK(rows[0].residual_ghz == doctest::Approx(shift_to_frequency(550.0, 549.9553)));
    CHECK(rows[0].factor == doctest::Approx(rows[0].actual_ghz / rows[0].residual_ghz));
    CHECK(!rows[0].capped);
    CHECK(rows[1].capped);
    CHECK(std::isinf(rows[1].factor));
    CHECK(rows[2].residual_ghz == doctest::Approx(shift_to_frequency(550.05, 550.01)));
    CHECK_THROWS_AS(mismatch_improvement(actual, std::vector<double>{1.0}), Error);
}

TEST_CASE("mismatch from a trace and a forecast") {
    const auto actual = ZplTrace::uniform(0.0, 5e-4, {539.0, 539.1, 539.2});
    forecast::ForecastResult f;
    f.predictions = {539.1, 539.15};
    f.horizon = 2;
    const auto rows = mismatch_improvement(actual, f);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].capped);
    CHECK(rows[1].residual_ghz == doctest::Approx(shift_to_frequency(539.2, 539.15)));
}

TEST_CASE("forecast origins tile the interval") {
    const auto o = forecast_origins(100, 130, 8);
    CHECK(o == std::vector<std::size_t>{99, 107, 115});
    for (std::size_t x : o) CHECK(x + 8 < 130);
    CHECK(forecast_origins(100, 108, 8) == std::vector<std::size_t>{99});
    CHECK(forecast_origins(100, 107, 8).empty());
    CHECK(forecast_origins(0, 100, 8).empty());
}

TEST_CASE("baseline benchmark on a sinusoid") {
    const auto trace = testing::sinusoid_ou_fixture(1200, 8);
    BenchmarkOptions opt;
    opt.models = {ModelKind::Linear, ModelKind::Poly5, ModelKind::Sine};
    opt.schemes = {{7, 2, 1}, {8, 1, 1}};
    const auto report = partition_benchmark(trace, opt);
    REQUIRE(report.cells.size() == 6);
    for (const auto& c : report.cells) {
        CHECK(c.rmse_nm > 0.0);
        CHECK(std::isfinite(c.rmse_norm));
        CHECK(c.origins == forecast_origins(forecast::split_ranges(1200, c.scheme).val_end, 1200, 8).size());
        const bool known_window = c.window == 8 || c.window == 16 || c.window == 32 || c.window == 64;
        CHECK(known_window);
        const auto r = forecast::split_ranges(1200, c.scheme);
        const double sd = testing::std_of(trace.values().subspan(0, r.train_end));
        CHECK(c.rmse_norm == doctest::Approx(c.rmse_nm / sd).epsilon(1e-12));
    }
    CHECK(report.mismatch.size() == 8);
    const auto again = partition_benchmark(trace, opt);
    for (std::size_t i = 0; i < 6; ++i) CHECK(again.cells[i].rmse_nm == report.cells[i].rmse_nm);

    BenchmarkOptions bad = opt;
    bad.horizon = 0;
    CHECK_THROWS_AS(partition_benchmark(trace, bad), Error);
    CHECK_THROWS_AS(partition_benchmark(trace.slice(0, 60), opt), Error);
}

TEST_CASE("network benchmark cell") {
    const auto trace = testing::sinusoid_ou_fixture(600, 8);
    BenchmarkOptions opt;
    opt.models = {ModelKind::BiAttnLstm};
    opt.schemes = {{8, 1, 1}};
    opt.hp.hidden_size = 4;
    opt.hp.sequence_length = 8;
    opt.max_epochs = 3;
    const auto report = partition_benchmark(trace, opt);
    REQUIRE(report.cells.size() == 1);
    CHECK(report.cells[0].window == 8);
    CHECK(report.cells[0].rmse_nm > 0.0);
}
