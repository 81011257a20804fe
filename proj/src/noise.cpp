#include "specdiff/noise.hpp"

#include "specdiff/error.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace specdiff::noise {

AcfResult acf(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    require(n >= 2, ErrorCode::TooFewPoints, "ACF needs at least 2 samples");
    require(2 * max_lag < n, ErrorCode::InvalidArgument, "max_lag must be < N/2");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = values[i] - mean;
    double c0 = 0.0;
    for (double v : x) c0 += v * v;
    require(c0 > 0.0, ErrorCode::DegenerateData, "constant trace has zero variance");

    AcfResult out;
    out.n = n;
    out.lags.resize(max_lag + 1);
    out.r.resize(max_lag + 1);
    out.band.resize(max_lag + 1);
    double sum_sq = 0.0;  // Σ_{i=1}^{k-1} r(i)²
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double ck = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) ck += x[t] * x[t + k];
        out.lags[k] = k;
        out.r[k] = k == 0 ? 1.0 : std::clamp(ck / c0, -1.0, 1.0);
        out.band[k] = 1.96 * std::sqrt((1.0 + 2.0 * sum_sq) / nd);
        if (k >= 1) sum_sq += out.r[k] * out.r[k];
    }
    return out;
}

AcfResult acf(const ZplTrace& trace, std::size_t max_lag) { return acf(trace.values(), max_lag); }

std::size_t first_band_crossing(const AcfResult& a) {
    for (std::size_t k = 1; k < a.r.size(); ++k) {
        if (std::abs(a.r[k]) <= a.band[k]) return k;
    }
    return a.r.size();
}

PowerLawFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorCode::LengthMismatch, "x and y differ in length");
    require(x.size() >= 2, ErrorCode::TooFewPoints, "power-law fit needs at least 2 points");
    const std::size_t n = x.size();
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::NonPositiveValue,
                "log-log fit requires positive values (point " + std::to_string(i) + ")");
        u[i] = std::log10(x[i]);
        v[i] = std::log10(y[i]);
    }
    const double nd = static_cast<double>(n);
    const double mu = std::accumulate(u.begin(), u.end(), 0.0) / nd;
    const double mv = std::accumulate(v.begin(), v.end(), 0.0) / nd;
    double suu = 0.0, suv = 0.0, svv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        suu += (u[i] - mu) * (u[i] - mu);
        suv += (u[i] - mu) * (v[i] - mv);
        svv += (v[i] - mv) * (v[i] - mv);
    }
    require(suu > 0.0, ErrorCode::DegenerateData, "log-log fit needs distinct abscissae");
    PowerLawFit fit;
    fit.exponent = suv / suu;
    fit.intercept = mv - fit.exponent * mu;
    fit.fit_range = {0, n - 1};
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = v[i] - (fit.intercept + fit.exponent * u[i]);
        sse += e * e;
    }
    fit.rms = std::sqrt(sse / nd);
    fit.r_squared = svv > 0.0 ? std::clamp(1.0 - sse / svv, 0.0, 1.0) : 1.0;
    return fit;
}

PowerLawFit fit_acf_power_law(const AcfResult& a, std::size_t first_lag, std::size_t last_lag) {
    require(first_lag >= 1, ErrorCode::InvalidArgument, "power-law region must start at lag >= 1");
    require(last_lag < a.r.size() && last_lag >= first_lag, ErrorCode::OutOfRange,
            "power-law region outside the computed lags");
    require(last_lag - first_lag + 1 >= 3, ErrorCode::TooFewPoints, "power-law region needs >= 3 lags");
    std::vector<double> k, r;
    for (std::size_t i = first_lag; i <= last_lag; ++i) {
        require(a.r[i] > 0.0, ErrorCode::NonPositiveValue,
                "autocorrelation is non-positive at lag " + std::to_string(i));
        k.push_back(static_cast<double>(a.lags[i]));
        r.push_back(a.r[i]);
    }
    auto fit = fit_log_log(k, r);
    fit.fit_range = {first_lag, last_lag};
    return fit;
}

// ---------------------------------------------------------------------------

namespace {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};

// |X_k|² for k = 0..n/2 of a real block.
std::vector<double> power_of_block(std::span<const double> block) {
    const std::size_t n = block.size();
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> out(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    std::unique_ptr<fftw_plan_s, PlanDestroy> plan(
        fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
    require(plan != nullptr, ErrorCode::InvalidArgument, "FFT plan creation failed");
    std::copy(block.begin(), block.end(), in.get());
    fftw_execute(plan.get());
    std::vector<double> p(n / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
    }
    return p;
}

std::vector<double> prepare_block(std::span<const double> v, bool detrend) {
    const std::size_t n = v.size();
    const double nd = static_cast<double>(n);
    std::vector<double> x(v.begin(), v.end());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    for (double& e : x) e -= mean;
    if (detrend) {
        const double tc = 0.5 * (nd - 1.0);
        double stt = 0.0, stx = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) - tc;
            stt += t * t;
            stx += t * x[i];
        }
        const double slope = stt > 0.0 ? stx / stt : 0.0;
        for (std::size_t i = 0; i < n; ++i) x[i] -= slope * (static_cast<double>(i) - tc);
    }
    return x;
}

}  // namespace

PsdResult periodogram_psd(std::span<const double> values, double fs, const PsdOptions& options) {
    require(values.size() >= 16, ErrorCode::TooFewPoints, "PSD needs at least 16 samples");
    require(std::isfinite(fs) && fs > 0.0, ErrorCode::InvalidArgument, "sampling rate must be > 0");
    require(options.segments >= 1, ErrorCode::InvalidArgument, "segments must be >= 1");
    const std::size_t m = values.size() / options.segments;
    require(m >= 16, ErrorCode::TooFewPoints, "PSD blocks need at least 16 samples");

    std::vector<double> acc(m / 2 + 1, 0.0);
    for (std::size_t s = 0; s < options.segments; ++s) {
        const auto block = prepare_block(values.subspan(s * m, m), options.detrend);
        const auto p = power_of_block(block);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
    }

    PsdResult out;
    out.fs = fs;
    out.detrended = options.detrend;
    out.segments = options.segments;
    const double md = static_cast<double>(m);
    const double scale = 1.0 / (fs * md * static_cast<double>(options.segments));
    out.freqs.resize(acc.size());
    out.power.resize(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        out.freqs[k] = static_cast<double>(k) * fs / md;
        const bool unpaired = k == 0 || (m % 2 == 0 && k == m / 2);
        out.power[k] = (unpaired ? 1.0 : 2.0) * acc[k] * scale;
    }
    return out;
}

PsdResult periodogram_psd(const ZplTrace& trace, const PsdOptions& options) {
    require(trace.size() >= 16, ErrorCode::TooFewPoints, "PSD needs at least 16 samples");
    const auto t = trace.timestamps();
    const double step = trace.step();
    for (std::size_t i = 1; i < t.size(); ++i) {
        require(std::abs((t[i] - t[i - 1]) - step) <= kTimestampTolerance, ErrorCode::NonUniformSampling,
                "PSD requires uniform sampling");
    }
    return periodogram_psd(trace.values(), 1.0 / step, options);
}

// ---------------------------------------------------------------------------

namespace {

// O(1) SSE of a least-squares line over [a, b) from prefix sums of centred
// coordinates.
class LineCost {
public:
    LineCost(const std::vector<double>& u, const std::vector<double>& v) {
        const std::size_t n = u.size();
        const double nd = static_cast<double>(n);
        const double mu = std::accumulate(u.begin(), u.end(), 0.0) / nd;
        const double mv = std::accumulate(v.begin(), v.end(), 0.0) / nd;
        su_.assign(n + 1, 0.0);
        sv_ = suu_ = suv_ = svv_ = su_;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u[i] - mu;
            const double y = v[i] - mv;
            su_[i + 1] = su_[i] + x;
            sv_[i + 1] = sv_[i] + y;
            suu_[i + 1] = suu_[i] + x * x;
            suv_[i + 1] = suv_[i] + x * y;
            svv_[i + 1] = svv_[i] + y * y;
        }
    }

    double operator()(std::size_t a, std::size_t b) const {
        const double n = static_cast<double>(b - a);
        const double su = su_[b] - su_[a];
        const double sv = sv_[b] - sv_[a];
        const double cuu = (suu_[b] - suu_[a]) - su * su / n;
        const double cuv = (suv_[b] - suv_[a]) - su * sv / n;
        const double cvv = (svv_[b] - svv_[a]) - sv * sv / n;
        const double sse = cuu > 0.0 ? cvv - cuv * cuv / cuu : cvv;
        return std::max(sse, 0.0);
    }

private:
    std::vector<double> su_, sv_, suu_, suv_, svv_;
};

struct Split {
    double sse = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> cuts;  // local indices
};

}  // namespace

SegmentedPsdFit fit_psd_segments(const PsdResult& psd, const SegmentOptions& options) {
    require(options.max_change_points <= kMaxChangePoints, ErrorCode::InvalidArgument,
            "at most 2 change points are supported");
    require(options.min_segment >= 2, ErrorCode::InvalidArgument, "min_segment must be >= 2");

    std::vector<std::size_t> index;  // PsdResult indices used by the fit
    for (std::size_t k = 1; k < psd.freqs.size(); ++k) {
        if (options.band && (psd.freqs[k] < options.band->first || psd.freqs[k] > options.band->second)) {
            continue;
        }
        index.push_back(k);
    }
    const std::size_t n = index.size();
    require(n >= 3 * options.min_segment, ErrorCode::TooFewPoints,
            "PSD has fewer than 3 × min_segment usable bins");

    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = psd.power[index[i]];
        require(p > 0.0, ErrorCode::NonPositiveValue,
                "zero power at bin " + std::to_string(index[i]) + "; log-log fit undefined");
        u[i] = std::log10(psd.freqs[index[i]]);
        v[i] = std::log10(p);
    }
    const LineCost cost(u, v);
    const std::size_t ms = options.min_segment;

    std::vector<Split> best(options.max_change_points + 1);
    best[0] = {cost(0, n), {}};
    if (options.max_change_points >= 1) {
        for (std::size_t c = ms; c + ms <= n; ++c) {
            const double s = cost(0, c) + cost(c, n);
            if (s < best[1].sse) best[1] = {s, {c}};
        }
    }
    if (options.max_change_points >= 2) {
        // Best single split of every suffix [c1, n), scanning c2 outward.
        std::vector<double> tail_sse(n + 1, std::numeric_limits<double>::infinity());
        std::vector<std::size_t> tail_cut(n + 1, 0);
        for (std::size_t c1 = ms; c1 + 2 * ms <= n; ++c1) {
            for (std::size_t c2 = c1 + ms; c2 + ms <= n; ++c2) {
                const double s = cost(c1, c2) + cost(c2, n);
                if (s < tail_sse[c1]) {
                    tail_sse[c1] = s;
                    tail_cut[c1] = c2;
                }
            }
            const double s = cost(0, c1) + tail_sse[c1];
            if (s < best[2].sse) best[2] = {s, {c1, tail_cut[c1]}};
        }
    }

    const double nd = static_cast<double>(n);
    std::size_t chosen = options.max_change_points;
    SegmentedPsdFit out;
    for (const auto& b : best) out.rms_by_count.push_back(std::sqrt(b.sse / nd));
    if (options.selection == ChangePointSelection::Bic) {
        // Variance floor keeps exact (noise-free) data from selecting spurious
        // breakpoints through log(0) or prefix-sum rounding.
        double energy = 0.0;
        for (double x : v) energy += x * x;
        const double floor = 1e-12 * energy + 1e-24 * nd;
        double best_bic = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < best.size(); ++k) {
            if (!std::isfinite(best[k].sse)) continue;
            const double params = 2.0 * static_cast<double>(k + 1) + static_cast<double>(k);
            const double bic = nd * std::log((best[k].sse + floor) / nd) + params * std::log(nd);
            if (bic < best_bic - 1e-9) {
                best_bic = bic;
                chosen = k;
            }
        }
    }
    while (!std::isfinite(best[chosen].sse)) --chosen;

    std::vector<std::size_t> bounds{0};
    for (std::size_t c : best[chosen].cuts) bounds.push_back(c);
    bounds.push_back(n);
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const std::size_t a = bounds[s];
        const std::size_t b = bounds[s + 1];
        std::vector<double> f, p;
        for (std::size_t i = a; i < b; ++i) {
            f.push_back(psd.freqs[index[i]]);
            p.push_back(psd.power[index[i]]);
        }
        PsdSegment seg;
        seg.first = index[a];
        seg.last = index[b - 1];
        seg.fit = fit_log_log(f, p);
        seg.fit.fit_range = {seg.first, seg.last};
        out.segments.push_back(seg);
        if (s > 0) out.change_points.push_back(index[a]);
    }
    out.total_rms = std::sqrt(best[chosen].sse / nd);
    return out;
}

}  // namespace specdiff::noise
