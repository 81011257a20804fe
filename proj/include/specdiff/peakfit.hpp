// peakfit.hpp: per-frame Lorentzian peak fitting and trace extraction.
#pragma once

#include "specdiff/least_squares.hpp"
#include "specdiff/types.hpp"

#include <span>
#include <utility>

namespace specdiff::peakfit {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct PeakFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
};

// offset + amplitude / (1 + (2 (x − center) / fwhm)²)
double lorentzian(double x, double center, double fwhm, double amplitude, double offset = 0.0);

// Parameter order: center, fwhm, amplitude, offset.
lsq::CurveModel lorentzian_model();

inline constexpr std::size_t kMinWindowBins = 5;

// Fits one Lorentzian + constant offset to the samples inside `window`.
// Initial guess: argmax bin, amplitude max − median, three-bin width, median
// offset.
PeakFit fit_peak(std::span<const double> axis, std::span<const double> intensity, Interval window,
                 const lsq::Options& options = {});

struct TraceExtraction {
    ZplTrace zpl;
    ZplTrace reference;
    std::size_t zpl_failed = 0;        // frames forward-filled
    std::size_t reference_failed = 0;
};

inline constexpr double kMaxFailedFraction = 0.2;

// Fits every frame in both windows; the trace value is the fitted center.
// Frames whose fit did not converge hold the previous frame's value.
TraceExtraction extract_traces(const SpectralSeries& series, Interval zpl_window,
                               Interval ref_window);

}  // namespace specdiff::peakfit
