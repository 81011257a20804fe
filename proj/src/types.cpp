#include "specdiff/types.hpp"

#include "specdiff/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specdiff {

SpectralSeries::SpectralSeries(std::vector<double> wavelength_axis, RowMatrix frames,
                               double frame_interval, double t0)
    : axis_(std::move(wavelength_axis)),
      frames_(std::move(frames)),
      frame_interval_(frame_interval),
      t0_(t0) {
    require(!axis_.empty(), ErrorCode::InvalidArgument, "wavelength axis is empty");
    require(std::isfinite(frame_interval_) && frame_interval_ > 0.0, ErrorCode::InvalidArgument,
            "frame_interval must be > 0");
    require(std::isfinite(t0_), ErrorCode::NonFinite, "t0 must be finite");
    for (std::size_t i = 0; i < axis_.size(); ++i) {
        require(std::isfinite(axis_[i]), ErrorCode::NonFinite, "wavelength axis holds a non-finite value");
        if (i > 0) {
            require(axis_[i] > axis_[i - 1], ErrorCode::NonMonotonicAxis,
                    "wavelength axis must be strictly increasing (bin " + std::to_string(i) + ")");
        }
    }
    require(frames_.rows() >= 1, ErrorCode::InvalidArgument, "series holds no frames");
    require(static_cast<std::size_t>(frames_.cols()) == axis_.size(), ErrorCode::RaggedRow,
            "frame length differs from axis length");
    for (Eigen::Index r = 0; r < frames_.rows(); ++r) {
        for (Eigen::Index c = 0; c < frames_.cols(); ++c) {
            const double v = frames_(r, c);
            require(std::isfinite(v), ErrorCode::NonFinite,
                    "non-finite intensity in frame " + std::to_string(r));
            require(v >= 0.0, ErrorCode::NegativeIntensity,
                    "negative intensity in frame " + std::to_string(r));
        }
    }
}

std::span<const double> SpectralSeries::frame(std::size_t i) const {
    require(i < n_frames(), ErrorCode::OutOfRange, "frame index out of range");
    return {frames_.data() + i * n_bins(), n_bins()};
}

double SpectralSeries::mean_bin_width() const noexcept {
    if (axis_.size() < 2) return 0.0;
    return (axis_.back() - axis_.front()) / static_cast<double>(axis_.size() - 1);
}

std::pair<std::size_t, std::size_t> SpectralSeries::bin_range(double lo, double hi) const {
    const auto first = std::lower_bound(axis_.begin(), axis_.end(), lo);
    const auto last = std::upper_bound(axis_.begin(), axis_.end(), hi);
    const auto a = static_cast<std::size_t>(first - axis_.begin());
    const auto b = static_cast<std::size_t>(last - axis_.begin());
    return {a, std::max(a, b)};
}

// ---------------------------------------------------------------------------

ZplTrace::ZplTrace(std::vector<double> timestamps, std::vector<double> values, std::string label)
    : timestamps_(std::move(timestamps)), values_(std::move(values)), label_(std::move(label)) {
    require(timestamps_.size() == values_.size(), ErrorCode::LengthMismatch,
            "timestamps and values differ in length");
    require(!values_.empty(), ErrorCode::TooFewPoints, "trace is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        require(std::isfinite(timestamps_[i]) && std::isfinite(values_[i]), ErrorCode::NonFinite,
                "non-finite sample at row " + std::to_string(i));
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        const double dt = timestamps_[i] - timestamps_[i - 1];
        require(dt != 0.0, ErrorCode::DuplicateTimestamp,
                "duplicate timestamp at row " + std::to_string(i));
        require(dt > 0.0, ErrorCode::NonIncreasingTime,
                "timestamps decrease at row " + std::to_string(i));
    }
    if (timestamps_.size() >= 2) {
        const double first = timestamps_[1] - timestamps_[0];
        for (std::size_t i = 2; i < timestamps_.size(); ++i) {
            const double dt = timestamps_[i] - timestamps_[i - 1];
            require(std::abs(dt - first) <= kTimestampTolerance, ErrorCode::NonUniformSampling,
                    "sampling step changes at row " + std::to_string(i));
        }
        step_ = (timestamps_.back() - timestamps_.front()) /
                static_cast<double>(timestamps_.size() - 1);
    }
}

ZplTrace ZplTrace::uniform(double t0, double step, std::vector<double> values, std::string label) {
    require(step > 0.0, ErrorCode::InvalidArgument, "step must be > 0");
    std::vector<double> t(values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = t0 + static_cast<double>(i) * step;
    ZplTrace out(std::move(t), std::move(values), std::move(label));
    if (out.size() < 2) out.step_ = step;
    return out;
}

ZplTrace ZplTrace::slice(std::size_t first, std::size_t count) const {
    require(first + count <= size() && count > 0, ErrorCode::OutOfRange, "slice outside trace");
    std::vector<double> t(timestamps_.begin() + first, timestamps_.begin() + first + count);
    std::vector<double> v(values_.begin() + first, values_.begin() + first + count);
    ZplTrace out(std::move(t), std::move(v), label_);
    if (out.size() < 2) out.step_ = step_;
    out.nominal_nm = nominal_nm;
    return out;
}

ZplTrace ZplTrace::shifted(double offset_nm) const {
    ZplTrace out = *this;
    for (double& v : out.values_) v += offset_nm;
    return out;
}

// ---------------------------------------------------------------------------

Histogram Histogram::empty(std::vector<double> bin_edges) {
    require(bin_edges.size() >= 2, ErrorCode::InvalidArgument, "histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bin_edges.size() - 1, 0);
    h.bin_edges = std::move(bin_edges);
    return h;
}

std::vector<double> Histogram::uniform_edges(double lo, double hi, std::size_t bins) {
    require(bins >= 1 && hi > lo, ErrorCode::InvalidArgument, "invalid histogram range");
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = hi;
    return edges;
}

bool Histogram::add(double value) {
    if (!(value >= bin_edges.front() && value <= bin_edges.back())) return false;
    auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), value);
    auto bin = static_cast<std::size_t>(it - bin_edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    bin = std::min(bin, counts.size() - 1);
    ++counts[bin];
    ++total;
    return true;
}

void Histogram::validate() const {
    require(counts.size() + 1 == bin_edges.size(), ErrorCode::InvalidArgument,
            "histogram counts/edges size mismatch");
    const auto sum = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    require(sum == total, ErrorCode::InvalidArgument, "histogram total mismatch");
}

}  // namespace specdiff
