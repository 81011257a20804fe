// g2.hpp: antibunching fit of second-order photon correlation data.
#pragma once

#include "specdiff/least_squares.hpp"

#include <span>

namespace specdiff::g2 {

struct G2Fit {
    double g2_0 = 0.0;
    double tau_antibunch = 0.0;   // seconds
    double g2_inf = 1.0;          // fixed: no bunching term
    double residual_rms = 0.0;
    bool converged = false;
};

// g²(t) = 1 − (1 − g²₀) exp(−|t| / τ)
double antibunching(double delay, double g2_0, double tau);

// Parameter order: g2_0, tau.
lsq::CurveModel antibunching_model();

G2Fit fit_g2(std::span<const double> delays, std::span<const double> values);

}  // namespace specdiff::g2
