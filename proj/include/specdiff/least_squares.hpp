// least_squares.hpp: bounded nonlinear least squares.
//
// Scaled dogleg trust region (Moré column scaling) with active-set freezing
// at bounds and reflection of steps that leave the box. Cost is
// ½‖r(p)‖²; accepted steps strictly decrease it.
#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace specdiff::lsq {

// Fills residuals r (size m) and, when J is non-null, the m×n Jacobian.
using ResidualFn =
    std::function<void(std::span<const double> params, Eigen::VectorXd& r, Eigen::MatrixXd* J)>;

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static Bounds unbounded(std::size_t n) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {std::vector<double>(n, -inf), std::vector<double>(n, inf)};
    }
};

struct Options {
    double gtol = 1e-10;  // cosine between residual and any free Jacobian column
    int max_iter = 200;
    double ftol = 1e-14;  // relative actual and predicted cost reduction
    double xtol = 1e-15;  // relative scaled step
    double initial_radius_factor = 100.0;
    bool record_history = false;
};

// Which test stopped the iteration. All but MaxIterations count as
// converged; cost and step tests fire when rounding in the residuals hides
// any further decrease.
enum class Termination { Gradient, CostTolerance, StepTolerance, NoFreeVariables, MaxIterations };

struct FitResult {
    std::vector<double> params;
    std::vector<double> covariance_proxy;  // diagonal of s²(JᵀJ)⁺
    int iterations = 0;
    bool converged = false;
    Termination termination = Termination::MaxIterations;
    double cost = 0.0;
    double gradient_measure = 0.0;  // the quantity compared against gtol
    std::vector<double> cost_history;   // cost after each accepted step (first entry: init)
};

FitResult solve(const ResidualFn& residuals, std::size_t n_residuals, std::span<const double> init,
                const Bounds& bounds, const Options& options = {});

// Curve model y = f(p; x) with optional analytic gradient ∂f/∂p.
struct CurveModel {
    std::function<double(std::span<const double> p, double x)> value;
    std::function<void(std::span<const double> p, double x, std::span<double> grad)> gradient;
};

// Fits model to (x, y); residual_i = f(p; x_i) − y_i. Without an analytic
// gradient, central differences are used.
FitResult least_squares_fit(const CurveModel& model, std::span<const double> init,
                            const Bounds& bounds, std::span<const double> x,
                            std::span<const double> y, const Options& options = {});

}  // namespace specdiff::lsq
