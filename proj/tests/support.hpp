// Shared fixtures for the unit and acceptance tests.
#pragma once

#include "specdiff/types.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace specdiff::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("specdiff-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double std_of(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Sinusoid plus Ornstein-Uhlenbeck wander sampled at 500 µs: period 40
// steps, amplitude 0.05 nm, OU std 0.01 nm with correlation time 20 steps.
inline ZplTrace sinusoid_ou_fixture(std::size_t n = 2000, std::uint64_t seed = 42) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const double phi = 0.95;
    const double ou_sd = 0.01;
    std::vector<double> v(n);
    double x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = 539.55 + 0.05 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 40.0) + x;
        x = phi * x + ou_sd * std::sqrt(1.0 - phi * phi) * g(rng);
    }
    return ZplTrace::uniform(0.0, 5e-4, std::move(v), "sinusoid+ou");
}

}  // namespace specdiff::testing

#include "specdiff/simulator.hpp"

namespace specdiff::testing {

// A few strongly coupled, slowly switching fluctuators: single windows of
// 100 frames see at most a couple of levels, the full series many.
inline sim::FluctuatorBathConfig quasi_quenched_bath(std::size_t frames = 3000) {
    sim::FluctuatorBathConfig b;
    b.n_fluctuators = 16;
    b.rate_range = {1.0, 8.0};
    b.coupling_scale = 1.2;
    b.measurement_noise = 0.0;
    b.n_frames = frames;
    return b;
}

}  // namespace specdiff::testing
