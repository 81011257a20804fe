// replica.hpp: overlap order parameter between spectral frames.
//
// Each frame in an analysis window is a replica. Deviations from the mean
// frame are compared by cosine similarity:
//   q_ab = ⟨Δ_a, Δ_b⟩ / (‖Δ_a‖ ‖Δ_b‖),  Δ_i = frame_i − mean frame.
#pragma once

#include "specdiff/types.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace specdiff::replica {

struct OverlapMatrix {
    Eigen::MatrixXd q;
    std::size_t window_start = 0;
    std::size_t window_len = 0;
    std::size_t excluded_pairs = 0;
    std::vector<bool> degenerate;  // per replica: deviation norm below eps
};

// Column means across replicas (rows).
Eigen::VectorXd mean_trajectory(const Eigen::Ref<const RowMatrix>& frames);

// eps < 0 selects the default floor, 1e-9 × the largest frame norm.
OverlapMatrix overlap_matrix(const Eigen::Ref<const RowMatrix>& frames, double eps = -1.0);

inline constexpr std::size_t kDefaultBins = 50;

// |q_ab| over the strict upper triangle, skipping degenerate pairs, binned on
// [0, 1].
Histogram overlap_histogram(const OverlapMatrix& m, std::size_t bins = kDefaultBins);

struct OverlapEvolution {
    std::vector<Histogram> histograms;
    std::vector<std::size_t> window_starts;
    std::size_t window_len = 0;
    std::size_t stride = 0;
    std::vector<double> bin_edges;
};

struct EvolutionOptions {
    std::size_t window_len = 100;
    std::size_t stride = 10;
    std::size_t bins = kDefaultBins;
    // Restrict replicas to bins inside [lo, hi] nm; full frame otherwise.
    std::optional<std::pair<double, double>> wavelength_window;
};

std::size_t window_count(std::size_t n_frames, std::size_t window_len, std::size_t stride);

// Windows whose pairs are all degenerate yield an all-zero histogram.
OverlapEvolution sliding_overlap_evolution(const SpectralSeries& series,
                                           const EvolutionOptions& options = {});

// Full-series matrix, optionally wavelength-restricted.
OverlapMatrix series_overlap(const SpectralSeries& series,
                             std::optional<std::pair<double, double>> wavelength_window = {});

}  // namespace specdiff::replica
