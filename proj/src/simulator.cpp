#include "specdiff/simulator.hpp"

#include "specdiff/error.hpp"
#include "specdiff/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace specdiff::sim {

void FluctuatorBathConfig::validate() const {
    require(n_fluctuators >= 1, ErrorCode::InvalidArgument, "n_fluctuators must be >= 1");
    require(rate_range.first > 0.0 && rate_range.second >= rate_range.first, ErrorCode::InvalidArgument,
            "rate_range must be positive and ordered");
    require(std::isfinite(coupling_scale) && coupling_scale >= 0.0, ErrorCode::InvalidArgument,
            "coupling_scale must be >= 0");
    require(std::isfinite(base_wavelength) && base_wavelength > 0.0, ErrorCode::InvalidArgument,
            "base_wavelength must be > 0");
    require(drift.reversion_rate >= 0.0 && drift.diffusion >= 0.0, ErrorCode::InvalidArgument,
            "drift parameters must be >= 0");
    require(measurement_noise >= 0.0, ErrorCode::InvalidArgument, "measurement_noise must be >= 0");
    require(std::isfinite(fs) && fs > 0.0, ErrorCode::InvalidArgument, "fs must be > 0");
    require(n_frames >= 1, ErrorCode::InvalidArgument, "n_frames must be >= 1");
    require(asymmetry > 0.0, ErrorCode::InvalidArgument, "asymmetry must be > 0");
}

void FrameRenderConfig::validate() const {
    require(axis_range.second > axis_range.first, ErrorCode::InvalidArgument, "axis range is empty");
    require(n_bins >= 32, ErrorCode::InvalidArgument, "n_bins must be >= 32");
    require(zpl_fwhm > 0.0 && raman_fwhm > 0.0, ErrorCode::InvalidArgument, "line widths must be > 0");
    require(zpl_amplitude >= 0.0 && raman_amplitude >= 0.0 && background >= 0.0,
            ErrorCode::InvalidArgument, "amplitudes and background must be >= 0");
    require(raman_center > axis_range.first && raman_center < axis_range.second, ErrorCode::OutOfRange,
            "Raman line outside the axis");
}

std::vector<double> FrameRenderConfig::axis() const {
    std::vector<double> a(n_bins);
    const double step = bin_width();
    for (std::size_t i = 0; i < n_bins; ++i) a[i] = axis_range.first + step * static_cast<double>(i);
    a.back() = axis_range.second;
    return a;
}

double FrameRenderConfig::bin_width() const {
    return (axis_range.second - axis_range.first) / static_cast<double>(n_bins - 1);
}

// ---------------------------------------------------------------------------

std::vector<double> telegraph_states(const Fluctuator& f, double fs, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto dwell = [&](double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return std::exponential_distribution<double>(rate)(rng);
    };
    // Stationary occupancy of +½ is rate_down / (rate_up + rate_down).
    const double total = f.rate_up + f.rate_down;
    const double p_up = total > 0.0 ? f.rate_down / total : 0.5;
    bool up = unit(rng) < p_up;
    double next = dwell(up ? f.rate_up : f.rate_down);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        while (next <= t) {
            up = !up;
            next += dwell(up ? f.rate_up : f.rate_down);
        }
        s[i] = up ? 0.5 : -0.5;
    }
    return s;
}

double bath_psd(const std::vector<Fluctuator>& fluctuators, double f) {
    const double omega = 2.0 * std::numbers::pi * f;
    double s = 0.0;
    for (const auto& k : fluctuators) {
        const double gamma = k.rate_up + k.rate_down;
        if (gamma <= 0.0) continue;
        const double p_up = k.rate_down / gamma;
        const double var = p_up * (1.0 - p_up);
        // One-sided: 2 × var × 2Γ / (Γ² + ω²).
        s += k.coupling * k.coupling * var * 4.0 * gamma / (gamma * gamma + omega * omega);
    }
    return s;
}

BathRealisation simulate_bath(const FluctuatorBathConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    BathRealisation out{{}, ZplTrace::uniform(0.0, 1.0 / cfg.fs, {cfg.base_wavelength})};
    const double a = cfg.coupling_scale / std::sqrt(static_cast<double>(cfg.n_fluctuators));
    const double log_lo = std::log(cfg.rate_range.first);
    const double log_hi = std::log(cfg.rate_range.second);
    const double skew = std::sqrt(cfg.asymmetry);
    // Stratified log-uniform: one rate per equal-width stratum of log γ.
    const double n = static_cast<double>(cfg.n_fluctuators);
    for (std::size_t k = 0; k < cfg.n_fluctuators; ++k) {
        const double u = (static_cast<double>(k) + unit(rng)) / n;
        const double gamma = std::exp(log_lo + (log_hi - log_lo) * u);
        out.fluctuators.push_back({gamma * skew, gamma / skew, a});
    }

    std::vector<double> values(cfg.n_frames, cfg.base_wavelength);
    for (std::size_t k = 0; k < out.fluctuators.size(); ++k) {
        const auto s = telegraph_states(out.fluctuators[k], cfg.fs, cfg.n_frames, derive_seed(seed, k + 1));
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += a * s[i];
    }

    const double dt = 1.0 / cfg.fs;
    const double theta = cfg.drift.reversion_rate;
    const double diff = cfg.drift.diffusion;
    if (diff > 0.0) {
        double x = 0.0;
        double decay = 1.0;
        double step_sd = std::sqrt(2.0 * diff * dt);
        if (theta > 0.0) {
            decay = std::exp(-theta * dt);
            step_sd = std::sqrt(diff / theta * (1.0 - decay * decay));
            x = std::sqrt(diff / theta) * gauss(rng);
        }
        for (double& v : values) {
            v += x;
            x = decay * x + step_sd * gauss(rng);
        }
    }
    if (cfg.measurement_noise > 0.0) {
        for (double& v : values) v += cfg.measurement_noise * gauss(rng);
    }

    out.trace = ZplTrace::uniform(0.0, dt, std::move(values), "simulated");
    out.trace.nominal_nm = cfg.base_wavelength;
    return out;
}

ZplTrace simulate_fluctuator_bath(const FluctuatorBathConfig& cfg, std::uint64_t seed) {
    return simulate_bath(cfg, seed).trace;
}

// ---------------------------------------------------------------------------

namespace {

double line(double x, double center, double fwhm, double amplitude) {
    const double u = 2.0 * (x - center) / fwhm;
    return amplitude / (1.0 + u * u);
}

}  // namespace

std::vector<double> expected_frame(double zpl_center, const FrameRenderConfig& cfg) {
    const auto axis = cfg.axis();
    std::vector<double> f(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) {
        f[i] = cfg.background + line(axis[i], zpl_center, cfg.zpl_fwhm, cfg.zpl_amplitude) +
               line(axis[i], cfg.raman_center, cfg.raman_fwhm, cfg.raman_amplitude);
    }
    return f;
}

SpectralSeries synthesize_spectra(const ZplTrace& trace, const FrameRenderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const double lo = cfg.axis_range.first + cfg.zpl_fwhm;
    const double hi = cfg.axis_range.second - cfg.zpl_fwhm;
    const auto values = trace.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        require(values[i] >= lo && values[i] <= hi, ErrorCode::OutOfRange,
                "trace exits the axis range at sample " + std::to_string(i));
    }
    const double interval = trace.size() >= 2 ? trace.step() : (trace.step() > 0.0 ? trace.step() : 1.0);

    RowMatrix frames(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(cfg.n_bins));
    for (std::size_t f = 0; f < values.size(); ++f) {
        auto row = expected_frame(values[f], cfg);
        if (cfg.shot_noise) {
            std::mt19937_64 rng(derive_seed(seed, f));
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (double& mean : row) {
                if (mean > 1000.0) {
                    mean = std::max(0.0, std::round(mean + std::sqrt(mean) * gauss(rng)));
                } else if (mean > 0.0) {
                    mean = static_cast<double>(std::poisson_distribution<long>(mean)(rng));
                }
            }
        }
        for (std::size_t b = 0; b < row.size(); ++b) {
            frames(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = row[b];
        }
    }
    return SpectralSeries(cfg.axis(), std::move(frames), interval, trace.timestamps().front());
}

// ---------------------------------------------------------------------------

Preset preset(std::string_view name) {
    Preset p;
    p.name = std::string(name);
    if (name == "bath") {
        p.bath.n_fluctuators = 50;
        p.bath.rate_range = {0.1, 100.0};
        p.bath.coupling_scale = 0.05;
        p.bath.measurement_noise = 0.001;
    } else if (name == "stable") {
        p.bath.n_fluctuators = 40;
        p.bath.rate_range = {0.1, 20.0};
        p.bath.coupling_scale = 0.04;
        p.bath.drift = {2.0, 2e-4};
        p.bath.measurement_noise = 0.004;
    } else if (name == "unstable") {
        p.bath.n_fluctuators = 60;
        p.bath.rate_range = {1.0, 1000.0};
        p.bath.coupling_scale = 0.08;
        p.bath.drift = {5.0, 2e-3};
        p.bath.measurement_noise = 0.01;
    } else {
        fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
    }
    return p;
}

std::vector<std::string> preset_names() { return {"stable", "unstable", "bath"}; }

}  // namespace specdiff::sim
