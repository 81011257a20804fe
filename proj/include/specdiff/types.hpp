// types.hpp: validated data carriers for spectrometer frames, scalar traces,
// histograms. All are immutable once constructed.
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace specdiff {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Time-ordered spectrometer frames on one wavelength axis. Intensities are
// stored frame-major (frame × bin).
class SpectralSeries {
public:
    SpectralSeries(std::vector<double> wavelength_axis, RowMatrix frames,
                   double frame_interval, double t0 = 0.0);

    std::size_t n_frames() const noexcept { return static_cast<std::size_t>(frames_.rows()); }
    std::size_t n_bins() const noexcept { return axis_.size(); }

    std::span<const double> axis() const noexcept { return axis_; }
    const RowMatrix& frames() const noexcept { return frames_; }
    std::span<const double> frame(std::size_t i) const;

    double frame_interval() const noexcept { return frame_interval_; }
    double t0() const noexcept { return t0_; }
    double time_of(std::size_t frame) const noexcept {
        return t0_ + static_cast<double>(frame) * frame_interval_;
    }
    double mean_bin_width() const noexcept;

    // Half-open bin index range [first, last) whose centers lie in [lo, hi].
    std::pair<std::size_t, std::size_t> bin_range(double lo, double hi) const;

private:
    std::vector<double> axis_;
    RowMatrix frames_;
    double frame_interval_;
    double t0_;
};

// Uniformly sampled scalar series; the ZPL center wavelength over time.
class ZplTrace {
public:
    ZplTrace(std::vector<double> timestamps, std::vector<double> values,
             std::string label = {});

    static ZplTrace uniform(double t0, double step, std::vector<double> values,
                            std::string label = {});

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> timestamps() const noexcept { return timestamps_; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& label() const noexcept { return label_; }

    // Sampling step in seconds; zero for a single-sample trace.
    double step() const noexcept { return step_; }
    double sample_rate() const noexcept { return step_ > 0.0 ? 1.0 / step_ : 0.0; }

    // Optional nominal emission wavelength carried as metadata.
    std::optional<double> nominal_nm;

    ZplTrace slice(std::size_t first, std::size_t count) const;
    ZplTrace shifted(double offset_nm) const;

private:
    std::vector<double> timestamps_;
    std::vector<double> values_;
    std::string label_;
    double step_ = 0.0;
};

inline constexpr double kTimestampTolerance = 1e-9;

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;

    static Histogram empty(std::vector<double> bin_edges);
    static std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

    // Value lands in the bin whose half-open interval contains it; the last
    // bin is closed on the right. Values outside the edges are ignored.
    bool add(double value);
    void validate() const;
};

}  // namespace specdiff
