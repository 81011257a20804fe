// eval.hpp: wavelength/frequency mismatch arithmetic and the partition
// benchmark.
#pragma once

#include "specdiff/forecaster.hpp"
#include "specdiff/types.hpp"

#include <span>
#include <vector>

namespace specdiff::eval {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kMaxWavelengthGap = 100.0;    // nm

// |ν_a − ν_b| in GHz for two vacuum wavelengths in nm.
double shift_to_frequency(double lambda_a_nm, double lambda_b_nm);

struct MismatchRow {
    std::size_t step = 0;  // 1-based
    double actual_ghz = 0.0;
    double residual_ghz = 0.0;
    double factor = 0.0;   // +inf when capped
    bool capped = false;   // residual was exactly zero
};

// actual holds the last observed value followed by the horizon values
// (length horizon + 1); predicted holds the horizon forecasts.
std::vector<MismatchRow> mismatch_improvement(std::span<const double> actual,
                                              std::span<const double> predicted);

// Same, with the actual segment given as a trace whose first sample is the
// forecast origin.
std::vector<MismatchRow> mismatch_improvement(const ZplTrace& actual, const forecast::ForecastResult& forecast);

struct ReportCell {
    forecast::ModelKind model = forecast::ModelKind::Linear;
    forecast::Split scheme;
    double rmse_norm = 0.0;   // rmse_nm / training-split std
    double rmse_nm = 0.0;
    std::size_t origins = 0;
    std::size_t window = 0;   // baseline window or sequence length
    double val_rmse_nm = 0.0;
};

struct BenchmarkOptions {
    std::vector<forecast::Split> schemes{{5, 4, 1}, {6, 3, 1}, {7, 2, 1}, {8, 1, 1}};
    std::vector<forecast::ModelKind> models{forecast::ModelKind::BiAttnLstm, forecast::ModelKind::Linear,
                                            forecast::ModelKind::Poly5, forecast::ModelKind::Sine};
    std::uint64_t seed = 0;
    std::size_t horizon = 8;
    int hpo_trials = 0;  // 0: train the fixed hyperparameters below
    forecast::Hyperparams hp{};
    int max_epochs = 500;
    int patience = 20;
    bool adapt = false;
    std::vector<std::size_t> baseline_windows{8, 16, 32, 64};
};

struct EvalReport {
    std::vector<ReportCell> cells;
    std::vector<MismatchRow> mismatch;  // first test origin of the first model/scheme
};

// Forecast origins (index of the last observed sample) whose horizon lies in
// [first, last).
std::vector<std::size_t> forecast_origins(std::size_t first, std::size_t last, std::size_t horizon);

// For each scheme × model: fit on data preceding each forecast origin,
// choose settings on the validation split, then score rolling horizon-step
// forecasts over the test split.
EvalReport partition_benchmark(const ZplTrace& trace, const BenchmarkOptions& options);

}  // namespace specdiff::eval
