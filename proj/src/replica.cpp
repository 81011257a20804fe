#include "specdiff/replica.hpp"

#include "specdiff/error.hpp"

#include <algorithm>
#include <cmath>

namespace specdiff::replica {

Eigen::VectorXd mean_trajectory(const Eigen::Ref<const RowMatrix>& frames) {
    require(frames.rows() >= 1 && frames.cols() >= 1, ErrorCode::EmptySelection,
            "mean trajectory of an empty frame set");
    return frames.colwise().mean().transpose();
}

OverlapMatrix overlap_matrix(const Eigen::Ref<const RowMatrix>& frames, double eps) {
    const Eigen::Index n = frames.rows();
    require(n >= 2, ErrorCode::TooFewPoints, "overlap needs at least 2 replicas");
    require(frames.cols() >= 1, ErrorCode::EmptySelection, "replicas have no bins");
    require(frames.allFinite(), ErrorCode::NonFinite, "non-finite frame value");

    const Eigen::RowVectorXd mean = mean_trajectory(frames).transpose();
    const RowMatrix dev = frames.rowwise() - mean;

    const double scale = frames.rowwise().norm().maxCoeff();
    if (eps < 0.0) eps = 1e-9 * scale;

    // Deviations sum to zero up to rounding of the mean.
    const double residual = dev.colwise().sum().cwiseAbs().maxCoeff();
    const double allowed = 1e-10 * std::max(1.0, frames.cwiseAbs().maxCoeff() * static_cast<double>(n));
    require(residual <= allowed, ErrorCode::DegenerateData, "deviations do not sum to zero");

    const Eigen::MatrixXd gram = dev * dev.transpose();
    const Eigen::VectorXd norms = gram.diagonal().cwiseMax(0.0).cwiseSqrt();

    OverlapMatrix out;
    out.window_len = static_cast<std::size_t>(n);
    out.degenerate.resize(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) out.degenerate[static_cast<std::size_t>(a)] = norms[a] <= eps;

    out.q = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            double q = 0.0;
            if (out.degenerate[static_cast<std::size_t>(a)] || out.degenerate[static_cast<std::size_t>(b)]) {
                ++out.excluded_pairs;
            } else {
                q = std::clamp(gram(a, b) / (norms[a] * norms[b]), -1.0, 1.0);
            }
            out.q(a, b) = q;
            out.q(b, a) = q;
        }
    }
    return out;
}

Histogram overlap_histogram(const OverlapMatrix& m, std::size_t bins) {
    require(bins >= 2, ErrorCode::InvalidArgument, "histogram needs at least 2 bins");
    Histogram h = Histogram::empty(Histogram::uniform_edges(0.0, 1.0, bins));
    const auto n = m.q.rows();
    for (Eigen::Index a = 0; a < n; ++a) {
        if (m.degenerate[static_cast<std::size_t>(a)]) continue;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            if (m.degenerate[static_cast<std::size_t>(b)]) continue;
            h.add(std::abs(m.q(a, b)));
        }
    }
    require(h.total > 0, ErrorCode::EmptySelection, "no non-degenerate replica pairs");
    return h;
}

std::size_t window_count(std::size_t n_frames, std::size_t window_len, std::size_t stride) {
    if (n_frames < window_len || stride == 0) return 0;
    return (n_frames - window_len) / stride + 1;
}

namespace {

std::pair<Eigen::Index, Eigen::Index> column_range(const SpectralSeries& series,
                                                   std::optional<std::pair<double, double>> window) {
    if (!window) return {0, static_cast<Eigen::Index>(series.n_bins())};
    const auto [a, b] = series.bin_range(window->first, window->second);
    require(b - a >= 2, ErrorCode::WindowTooNarrow, "wavelength window covers fewer than 2 bins");
    return {static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b - a)};
}

}  // namespace

OverlapEvolution sliding_overlap_evolution(const SpectralSeries& series, const EvolutionOptions& options) {
    require(options.window_len >= 3, ErrorCode::InvalidArgument, "window_len must be >= 3");
    require(options.stride >= 1, ErrorCode::InvalidArgument, "stride must be >= 1");
    require(series.n_frames() >= options.window_len, ErrorCode::TooFewPoints,
            "series shorter than the overlap window");
    const auto [col0, ncols] = column_range(series, options.wavelength_window);

    OverlapEvolution out;
    out.window_len = options.window_len;
    out.stride = options.stride;
    out.bin_edges = Histogram::uniform_edges(0.0, 1.0, options.bins);
    const std::size_t windows = window_count(series.n_frames(), options.window_len, options.stride);
    for (std::size_t w = 0; w < windows; ++w) {
        const std::size_t start = w * options.stride;
        const auto block = series.frames().block(static_cast<Eigen::Index>(start), col0,
                                                 static_cast<Eigen::Index>(options.window_len), ncols);
        auto m = overlap_matrix(block);
        m.window_start = start;
        Histogram h = Histogram::empty(out.bin_edges);
        const auto usable = std::count(m.degenerate.begin(), m.degenerate.end(), false);
        if (usable >= 2) {
            h = overlap_histogram(m, options.bins);
        }
        out.histograms.push_back(std::move(h));
        out.window_starts.push_back(start);
    }
    return out;
}

OverlapMatrix series_overlap(const SpectralSeries& series,
                             std::optional<std::pair<double, double>> wavelength_window) {
    const auto [col0, ncols] = column_range(series, wavelength_window);
    return overlap_matrix(series.frames().block(0, col0, series.frames().rows(), ncols));
}

}  // namespace specdiff::replica
