// noise.hpp: memory diagnostics for a scalar trace, namely sample autocorrelation
// with confidence bands, power-law fits, periodogram PSD and piecewise
// log-log segmentation of the PSD.
#pragma once

#include "specdiff/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace specdiff::noise {

struct AcfResult {
    std::vector<std::size_t> lags;
    std::vector<double> r;
    std::vector<double> band;  // half-width of the 95 % band around zero
    std::size_t n = 0;
};

// Biased estimator: r(k) = Σ (x_t − x̄)(x_{t+k} − x̄) / Σ (x_t − x̄)².
// band(k) = 1.96 √((1 + 2 Σ_{i<k} r(i)²) / N), sum over i = 1..k−1.
AcfResult acf(std::span<const double> values, std::size_t max_lag);
AcfResult acf(const ZplTrace& trace, std::size_t max_lag);

// First lag ≥ 1 where |r| falls inside the band; max_lag + 1 if none.
std::size_t first_band_crossing(const AcfResult& acf);

struct PowerLawFit {
    double exponent = 0.0;   // slope in log-log coordinates
    double intercept = 0.0;  // log10 units
    std::pair<std::size_t, std::size_t> fit_range;  // inclusive index interval
    double r_squared = 0.0;
    double rms = 0.0;        // residual RMS in log10 units
};

// OLS of log10 y on log10 x over the given points.
PowerLawFit fit_log_log(std::span<const double> x, std::span<const double> y);

// Fit of log r(k) against log k over lags [first, last].
PowerLawFit fit_acf_power_law(const AcfResult& acf, std::size_t first_lag, std::size_t last_lag);

struct PsdResult {
    std::vector<double> freqs;   // Hz, starting at DC
    std::vector<double> power;   // units² / Hz, one-sided
    double fs = 0.0;
    bool detrended = false;
    std::size_t segments = 1;
};

struct PsdOptions {
    bool detrend = false;     // remove a least-squares line; the mean is always removed
    std::size_t segments = 1; // >1 averages periodograms of equal contiguous blocks
};

// One-sided periodogram normalised so Σ power·Δf equals the variance of the
// (detrended) signal.
PsdResult periodogram_psd(const ZplTrace& trace, const PsdOptions& options = {});
PsdResult periodogram_psd(std::span<const double> values, double fs, const PsdOptions& options = {});

struct PsdSegment {
    std::size_t first = 0;   // index into PsdResult (inclusive)
    std::size_t last = 0;    // inclusive
    PowerLawFit fit;
};

struct SegmentedPsdFit {
    std::vector<std::size_t> change_points;  // index of the first bin of each later segment
    std::vector<PsdSegment> segments;
    double total_rms = 0.0;  // residual RMS over all fitted bins, log10 units
    std::vector<double> rms_by_count;  // optimal total RMS for 0, 1, ... change points
};

inline constexpr std::size_t kMaxChangePoints = 2;
inline constexpr std::size_t kDefaultMinSegment = 5;

enum class ChangePointSelection {
    Exact,  // always use max_change_points breakpoints
    Bic,    // choose the count minimising the Bayesian information criterion
};

struct SegmentOptions {
    std::size_t max_change_points = kMaxChangePoints;
    std::size_t min_segment = kDefaultMinSegment;
    ChangePointSelection selection = ChangePointSelection::Bic;
    // Optional frequency band in Hz to restrict the fit to.
    std::optional<std::pair<double, double>> band;
};

// Exact search over breakpoint positions minimising the summed squared
// residual of per-segment log-log lines. DC is always excluded.
SegmentedPsdFit fit_psd_segments(const PsdResult& psd, const SegmentOptions& options = {});

}  // namespace specdiff::noise
