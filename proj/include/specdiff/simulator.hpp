// simulator.hpp: synthetic emitter where a bath of two-state fluctuators plus an
// Ornstein–Uhlenbeck drift moves the ZPL; frames are rendered as Lorentzian
// lines over a static Raman reference.
#pragma once

#include "specdiff/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace specdiff::sim {

struct OuDrift {
    double reversion_rate = 0.0;  // 1/s
    double diffusion = 0.0;       // nm²/s; dx = −θx dt + √(2D) dW
};

struct FluctuatorBathConfig {
    std::size_t n_fluctuators = 50;
    std::pair<double, double> rate_range{0.1, 100.0};  // Hz, log-uniform
    double coupling_scale = 0.05;                        // nm
    double base_wavelength = 539.55;                     // nm
    OuDrift drift;
    double measurement_noise = 0.0;  // nm std
    double fs = 2000.0;              // Hz
    std::size_t n_frames = 10000;
    // Ratio of up→down to down→up rate; 1 gives the symmetric telegraph.
    double asymmetry = 1.0;

    void validate() const;
};

struct FrameRenderConfig {
    std::pair<double, double> axis_range{536.0, 550.0};
    std::size_t n_bins = 512;
    double zpl_fwhm = 0.3;
    double zpl_amplitude = 2000.0;
    double raman_center = 547.44;
    double raman_fwhm = 0.25;
    double raman_amplitude = 3000.0;
    double background = 50.0;
    bool shot_noise = true;

    void validate() const;
    std::vector<double> axis() const;
    double bin_width() const;
};

// Per-fluctuator parameters drawn from the config.
struct Fluctuator {
    double rate_up = 0.0;    // rate of leaving the +½ state (Hz)
    double rate_down = 0.0;  // rate of leaving the −½ state (Hz)
    double coupling = 0.0;   // nm
};

struct BathRealisation {
    std::vector<Fluctuator> fluctuators;
    ZplTrace trace;
};

// λ₀(t) = base + Σ a_k s_k(t) + OU(t) + noise, s_k ∈ {−½, +½}. Switching is
// sampled exactly from exponential dwell times. Deterministic per seed.
BathRealisation simulate_bath(const FluctuatorBathConfig& cfg, std::uint64_t seed);
ZplTrace simulate_fluctuator_bath(const FluctuatorBathConfig& cfg, std::uint64_t seed);

// Telegraph state sequence s(t_n) ∈ {−½, +½} sampled at fs.
std::vector<double> telegraph_states(const Fluctuator& f, double fs, std::size_t n, std::uint64_t seed);

// Two-sided-to-one-sided analytic PSD (nm²/Hz) of Σ a_k s_k at frequency f.
double bath_psd(const std::vector<Fluctuator>& fluctuators, double f);

// One Lorentzian ZPL at the trace value per frame, plus the Raman line and a
// flat background; optional Poisson shot noise (Gaussian above 1000 counts).
SpectralSeries synthesize_spectra(const ZplTrace& trace, const FrameRenderConfig& cfg, std::uint64_t seed);

// Noise-free expected counts of one frame.
std::vector<double> expected_frame(double zpl_center, const FrameRenderConfig& cfg);

struct Preset {
    std::string name;
    FluctuatorBathConfig bath;
    FrameRenderConfig render;
};

// "stable", "unstable" and "bath" (pure 1/f reference).
Preset preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace specdiff::sim
