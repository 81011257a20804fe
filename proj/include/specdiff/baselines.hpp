// baselines.hpp: classical extrapolation forecasters.
#pragma once

#include "specdiff/forecaster.hpp"
#include "specdiff/types.hpp"

#include <span>

namespace specdiff::forecast {

// y = amplitude · sin(omega · t + phase) + offset, t in seconds from the
// first sample of the fitted window.
struct SineParams {
    double amplitude = 0.0;
    double omega = 0.0;   // rad/s
    double phase = 0.0;   // (−π, π]
    double offset = 0.0;
    bool converged = false;

    double operator()(double t) const;
};

// ω is seeded from the largest DFT bin of the mean-removed samples.
SineParams fit_sine(std::span<const double> t, std::span<const double> y);

// Least-squares polynomial coefficients in the scaled index
// u = (i − c) / s over samples i = 0..n−1; returns values at the requested
// (possibly fractional, possibly out-of-window) indices.
std::vector<double> polynomial_extrapolate(std::span<const double> y, int degree,
                                           std::span<const double> at_indices);

std::size_t min_history(ModelKind kind);

// Fits the model on the trailing `window` samples of history (0 = all of
// it) and extrapolates `horizon` steps past the last sample.
ForecastResult baseline_forecast(ModelKind kind, const ZplTrace& history, std::size_t horizon,
                                 std::size_t window = 0);

}  // namespace specdiff::forecast
