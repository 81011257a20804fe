// forecaster.hpp: training, inference and autoregressive forecasting with
// the attention Bi-LSTM.
#pragma once

#include "specdiff/network.hpp"
#include "specdiff/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace specdiff::forecast {

// train:val:test proportions in tenths (e.g. {8, 1, 1}).
struct Split {
    int train = 8;
    int val = 1;
    int test = 1;

    void validate() const;
    std::string label() const;
};

struct SplitRanges {
    std::size_t train_end = 0;  // [0, train_end)
    std::size_t val_end = 0;    // [train_end, val_end)
    std::size_t size = 0;       // test: [val_end, size)
};

SplitRanges split_ranges(std::size_t n, const Split& split);

struct Normalizer {
    double mean = 0.0;
    double std = 1.0;

    double normalize(double x) const { return (x - mean) / std; }
    double denormalize(double z) const { return z * std + mean; }
};

struct TrainMeta {
    int epochs_run = 0;
    int best_epoch = 0;
    double best_val_rmse = 0.0;           // normalised units
    std::vector<double> train_rmse;       // per epoch
    std::vector<double> val_rmse;         // per epoch
};

struct TrainedForecaster {
    Hyperparams hp;
    std::vector<double> parameters;
    Normalizer norm;
    double reference_volatility = 1.0;  // median rolling std of training windows (normalised)
    TrainMeta meta;

    Network network() const { return Network(hp); }
};

struct TrainOptions {
    Split split;
    std::uint64_t seed = 0;
    int max_epochs = 500;
    int patience = 20;
    double min_delta = 1e-5;
    int batch_size = 32;
    int horizon = 8;  // only used to check the trace is long enough
};

// z-scores with training-split statistics, builds L→1 sliding windows
// (inputs may reach back across split boundaries, targets never do),
// minimises MSE with Adam and early-stops on validation RMSE, returning the
// best-validation checkpoint.
TrainedForecaster train(const ZplTrace& trace, const Hyperparams& hp, const TrainOptions& options);

struct Prediction {
    double value = 0.0;              // normalised
    std::vector<double> attention;   // length = window length
};

// Inference-mode forward pass on a normalised window of length 2..L.
Prediction forward(const TrainedForecaster& model, std::span<const double> window);

// One-step (teacher-forced) RMSE in normalised units over targets
// [first, last) of the trace.
double one_step_rmse(const TrainedForecaster& model, const ZplTrace& trace, std::size_t first,
                     std::size_t last);

enum class ModelKind { BiAttnLstm, Linear, Poly5, Sine };
std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct ForecastResult {
    std::vector<double> predictions;   // nm
    std::vector<double> timestamps;    // s
    std::size_t horizon = 0;
    std::vector<std::vector<double>> attention_maps;
    std::vector<std::size_t> window_lengths;
    ModelKind model_kind = ModelKind::BiAttnLstm;
};

inline constexpr int kMinAdaptiveWindow = 4;
inline constexpr double kVolatilityTrigger = 1.25;

// Effective window length for the given recent normalised values: L unless
// their std exceeds kVolatilityTrigger × the reference volatility, then
// clamp(round(L · σ_ref / σ_recent), 4, L).
int adaptive_window(const TrainedForecaster& model, std::span<const double> recent);

// Feeds each prediction back as input for the next step.
ForecastResult autoregressive_forecast(const TrainedForecaster& model, const ZplTrace& history,
                                       std::size_t horizon = 8, bool adapt = false);

// ---------------------------------------------------------------------------

struct Batch {
    std::vector<std::vector<double>> windows;
    std::vector<double> targets;
};

// MSE over the batch and its gradient (inference mode, no dropout).
double loss_and_gradient(const Network& net, std::span<const double> theta, const Batch& batch,
                         std::span<double> grad);

struct GradientCheckReport {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;
    double sum_absolute_error = 0.0;
    std::size_t checked = 0;
};

inline constexpr double kGradientFloor = 1e-6;

// Central finite differences on a fixed random batch versus backward();
// relative error |a − n| / max(|a|, |n|, kGradientFloor).
GradientCheckReport gradient_check(const Hyperparams& hp, std::uint64_t seed, std::size_t n_params_sampled,
                                   double fd_step = 1e-5);

}  // namespace specdiff::forecast
