#include "specdiff/peakfit.hpp"

#include "specdiff/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace specdiff::peakfit {

double lorentzian(double x, double center, double fwhm, double amplitude, double offset) {
    const double u = 2.0 * (x - center) / fwhm;
    return offset + amplitude / (1.0 + u * u);
}

lsq::CurveModel lorentzian_model() {
    lsq::CurveModel model;
    model.value = [](std::span<const double> p, double x) {
        return lorentzian(x, p[0], p[1], p[2], p[3]);
    };
    model.gradient = [](std::span<const double> p, double x, std::span<double> grad) {
        const double w = p[1];
        const double a = p[2];
        const double u = 2.0 * (x - p[0]) / w;
        const double l = 1.0 / (1.0 + u * u);
        const double l2 = l * l;
        grad[0] = 4.0 * a * u * l2 / w;
        grad[1] = 2.0 * a * u * u * l2 / w;
        grad[2] = l;
        grad[3] = 1.0;
    };
    return model;
}

namespace {

double median(std::vector<double> v) {
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lower);
    }
    return m;
}

std::pair<std::size_t, std::size_t> window_bins(std::span<const double> axis, Interval window) {
    const auto first = std::lower_bound(axis.begin(), axis.end(), window.lo);
    const auto last = std::upper_bound(axis.begin(), axis.end(), window.hi);
    return {static_cast<std::size_t>(first - axis.begin()),
            static_cast<std::size_t>(last - axis.begin())};
}

}  // namespace

PeakFit fit_peak(std::span<const double> axis, std::span<const double> intensity, Interval window,
                 const lsq::Options& options) {
    require(axis.size() == intensity.size(), ErrorCode::LengthMismatch, "axis and frame differ in length");
    require(window.hi > window.lo, ErrorCode::InvalidArgument, "empty fitting window");
    const auto [first, last] = window_bins(axis, window);
    require(last > first && last - first >= kMinWindowBins, ErrorCode::WindowTooNarrow,
            "window covers fewer than " + std::to_string(kMinWindowBins) + " bins");

    const std::span<const double> x = axis.subspan(first, last - first);
    const std::span<const double> y = intensity.subspan(first, last - first);
    const double bin = (x.back() - x.front()) / static_cast<double>(x.size() - 1);

    const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
    const double base = median(std::vector<double>(y.begin(), y.end()));
    const double amp0 = std::max(y[peak] - base, 1e-6 * std::max(1.0, std::abs(y[peak])));
    const double fwhm0 = std::min(3.0 * bin, window.width());

    constexpr double inf = std::numeric_limits<double>::infinity();
    lsq::Bounds bounds{{window.lo, 0.25 * bin, 0.0, -inf}, {window.hi, 2.0 * window.width(), inf, inf}};
    const std::vector<double> init{std::clamp(x[peak], window.lo, window.hi), fwhm0, amp0, base};
    const auto fit = lsq::least_squares_fit(lorentzian_model(), init, bounds, x, y, options);

    PeakFit out;
    out.center = fit.params[0];
    out.fwhm = fit.params[1];
    out.amplitude = fit.params[2];
    out.offset = fit.params[3];
    out.residual_rms = std::sqrt(2.0 * fit.cost / static_cast<double>(x.size()));
    out.converged = fit.converged && out.amplitude > 0.0 && out.fwhm > 0.0 && window.contains(out.center);
    return out;
}

namespace {

struct WindowTrace {
    std::vector<double> values;
    std::size_t failed = 0;
};

WindowTrace fit_window(const SpectralSeries& series, Interval window) {
    WindowTrace out;
    out.values.resize(series.n_frames());
    const auto axis = series.axis();
    double previous = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t f = 0; f < series.n_frames(); ++f) {
        const auto fit = fit_peak(axis, series.frame(f), window);
        if (fit.converged) {
            previous = fit.center;
        } else {
            ++out.failed;
            if (std::isnan(previous)) previous = std::clamp(fit.center, window.lo, window.hi);
        }
        out.values[f] = previous;
    }
    return out;
}

}  // namespace

TraceExtraction extract_traces(const SpectralSeries& series, Interval zpl_window, Interval ref_window) {
    const auto axis = series.axis();
    for (const Interval& w : {zpl_window, ref_window}) {
        require(w.hi > w.lo, ErrorCode::InvalidArgument, "empty window");
        require(w.lo >= axis.front() && w.hi <= axis.back(), ErrorCode::OutOfRange,
                "window outside the wavelength axis");
        const auto [a, b] = window_bins(axis, w);
        require(b - a >= kMinWindowBins, ErrorCode::WindowTooNarrow,
                "window covers fewer than " + std::to_string(kMinWindowBins) + " bins");
    }
    require(zpl_window.hi < ref_window.lo || ref_window.hi < zpl_window.lo, ErrorCode::InvalidArgument,
            "ZPL and reference windows overlap");

    const auto zpl = fit_window(series, zpl_window);
    const auto ref = fit_window(series, ref_window);
    const double limit = kMaxFailedFraction * static_cast<double>(series.n_frames());
    for (const auto& [name, w] : {std::pair{"ZPL", &zpl}, std::pair{"reference", &ref}}) {
        require(static_cast<double>(w->failed) <= limit, ErrorCode::TooManyFailedFits,
                std::string(name) + " window: " + std::to_string(w->failed) + " of " +
                    std::to_string(series.n_frames()) + " frame fits did not converge");
    }

    auto times = [&] {
        std::vector<double> t(series.n_frames());
        for (std::size_t f = 0; f < t.size(); ++f) t[f] = series.time_of(f);
        return t;
    };
    TraceExtraction out{ZplTrace(times(), zpl.values, "zpl"), ZplTrace(times(), ref.values, "reference"),
                        zpl.failed, ref.failed};
    return out;
}

}  // namespace specdiff::peakfit
