#include "specdiff/g2.hpp"

#include "specdiff/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace specdiff::g2 {

double antibunching(double delay, double g2_0, double tau) {
    return 1.0 - (1.0 - g2_0) * std::exp(-std::abs(delay) / tau);
}

lsq::CurveModel antibunching_model() {
    lsq::CurveModel model;
    model.value = [](std::span<const double> p, double t) { return antibunching(t, p[0], p[1]); };
    model.gradient = [](std::span<const double> p, double t, std::span<double> grad) {
        const double adj = std::abs(t);
        const double e = std::exp(-adj / p[1]);
        grad[0] = e;
        grad[1] = -(1.0 - p[0]) * e * adj / (p[1] * p[1]);
    };
    return model;
}

G2Fit fit_g2(std::span<const double> delays, std::span<const double> values) {
    require(delays.size() == values.size(), ErrorCode::LengthMismatch, "delays and values differ in length");
    require(delays.size() >= 4, ErrorCode::TooFewPoints, "g2 fit needs at least 4 points");
    for (std::size_t i = 0; i < delays.size(); ++i) {
        require(std::isfinite(delays[i]) && std::isfinite(values[i]), ErrorCode::NonFinite,
                "non-finite g2 sample");
    }
    const auto [vmin, vmax] = std::minmax_element(values.begin(), values.end());
    require(*vmax > *vmin, ErrorCode::DegenerateData, "all g2 values are identical");

    // Seed: dip depth from the sample nearest zero delay, τ from the 1/e
    // recovery point.
    std::size_t nearest = 0;
    double max_delay = 0.0;
    for (std::size_t i = 0; i < delays.size(); ++i) {
        if (std::abs(delays[i]) < std::abs(delays[nearest])) nearest = i;
        max_delay = std::max(max_delay, std::abs(delays[i]));
    }
    require(max_delay > 0.0, ErrorCode::DegenerateData, "all delays are zero");
    const double g0_init = std::clamp(values[nearest], 0.0, 0.99);
    const double target = 1.0 - (1.0 - g0_init) / std::exp(1.0);
    double tau_init = max_delay / 10.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < delays.size(); ++i) {
        const double adj = std::abs(delays[i]);
        if (adj == 0.0) continue;
        const double miss = std::abs(values[i] - target);
        if (miss < best) {
            best = miss;
            tau_init = adj;
        }
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    const lsq::Bounds bounds{{0.0, max_delay * 1e-9}, {1.0, inf}};
    const std::vector<double> init{g0_init, tau_init};
    const auto fit = lsq::least_squares_fit(antibunching_model(), init, bounds, delays, values);

    G2Fit out;
    out.g2_0 = fit.params[0];
    out.tau_antibunch = fit.params[1];
    out.residual_rms = std::sqrt(2.0 * fit.cost / static_cast<double>(delays.size()));
    out.converged = fit.converged && out.g2_0 < 1.0 && out.tau_antibunch > 0.0;
    return out;
}

}  // namespace specdiff::g2
