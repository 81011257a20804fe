#include "specdiff/least_squares.hpp"

#include "specdiff/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace specdiff::lsq {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Projected MINPACK-style gradient test: max over free columns of
// |J_iᵀ r| / (‖J_i‖ ‖r‖).
double gradient_measure(const Eigen::MatrixXd& J, const Eigen::VectorXd& r,
                        const std::vector<bool>& frozen) {
    const double rnorm = r.norm();
    if (rnorm == 0.0) return 0.0;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j) {
        if (frozen[static_cast<std::size_t>(j)]) continue;
        const double cn = J.col(j).norm();
        if (cn == 0.0) continue;
        worst = std::max(worst, std::abs(J.col(j).dot(r)) / (cn * rnorm));
    }
    return worst;
}

// Variables sitting on a bound whose descent direction points outward.
std::vector<bool> active_set(const Eigen::VectorXd& p, const Eigen::VectorXd& g, const Bounds& b) {
    std::vector<bool> frozen(static_cast<std::size_t>(p.size()), false);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (p[i] <= b.lower[k] && g[i] > 0.0) frozen[k] = true;
        if (p[i] >= b.upper[k] && g[i] < 0.0) frozen[k] = true;
    }
    return frozen;
}

double reflect_into(double v, double lo, double hi) {
    if (v > hi) v = hi - (v - hi);
    if (v < lo) v = lo + (lo - v);
    return std::clamp(v, lo, hi);
}

}  // namespace

FitResult solve(const ResidualFn& residuals, std::size_t n_residuals, std::span<const double> init,
                const Bounds& bounds, const Options& options) {
    const auto n = static_cast<Eigen::Index>(init.size());
    const auto m = static_cast<Eigen::Index>(n_residuals);
    require(n >= 1, ErrorCode::InvalidArgument, "no parameters to fit");
    require(m >= n, ErrorCode::TooFewPoints, "fewer residuals than parameters");
    require(bounds.lower.size() == init.size() && bounds.upper.size() == init.size(),
            ErrorCode::InvalidArgument, "bounds size differs from parameter count");
    for (std::size_t i = 0; i < init.size(); ++i) {
        require(bounds.lower[i] <= bounds.upper[i], ErrorCode::InvalidArgument, "inverted bounds");
        require(init[i] >= bounds.lower[i] && init[i] <= bounds.upper[i], ErrorCode::OutOfRange,
                "initial parameter " + std::to_string(i) + " outside bounds");
    }

    Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), n);
    Eigen::VectorXd r(m);
    Eigen::MatrixXd J(m, n);
    auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& res, Eigen::MatrixXd* jac) {
        res.resize(m);
        if (jac) jac->resize(m, n);
        residuals(std::span<const double>(at.data(), static_cast<std::size_t>(n)), res, jac);
    };
    eval(p, r, &J);
    require(all_finite(r), ErrorCode::NonFinite, "non-finite residual at initial parameters");
    require(J.allFinite(), ErrorCode::NonFinite, "non-finite Jacobian at initial parameters");

    FitResult out;
    double cost = 0.5 * r.squaredNorm();
    if (options.record_history) out.cost_history.push_back(cost);

    Eigen::VectorXd diag = J.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (diag[i] == 0.0) diag[i] = 1.0;
    }
    double radius = options.initial_radius_factor * (diag.cwiseProduct(p)).norm();
    if (radius == 0.0) radius = options.initial_radius_factor;

    Eigen::VectorXd g = J.transpose() * r;
    std::vector<bool> frozen = active_set(p, g, bounds);
    int iter = 0;
    while (true) {
        out.gradient_measure = gradient_measure(J, r, frozen);
        if (out.gradient_measure <= options.gtol) {
            out.termination = Termination::Gradient;
            break;
        }
        if (iter >= options.max_iter) break;
        ++iter;

        // Subproblem in scaled free variables: J̃ = J_F D_F⁻¹.
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!frozen[static_cast<std::size_t>(i)]) free.push_back(i);
        }
        if (free.empty()) {
            out.termination = Termination::NoFreeVariables;
            break;
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Js(m, nf);
        for (Eigen::Index k = 0; k < nf; ++k) Js.col(k) = J.col(free[k]) / diag[free[k]];
        const Eigen::VectorXd gs = Js.transpose() * r;

        const Eigen::VectorXd s_gn = Js.completeOrthogonalDecomposition().solve(-r);
        Eigen::VectorXd s_scaled;
        if (s_gn.allFinite() && s_gn.norm() <= radius) {
            s_scaled = s_gn;
        } else {
            const double gnorm2 = gs.squaredNorm();
            const double jg2 = (Js * gs).squaredNorm();
            const double alpha = jg2 > 0.0 ? gnorm2 / jg2 : radius / std::sqrt(gnorm2);
            const Eigen::VectorXd s_c = -alpha * gs;
            if (!s_gn.allFinite() || s_c.norm() >= radius) {
                s_scaled = -(radius / std::sqrt(gnorm2)) * gs;
            } else {
                // Point on the dogleg path at distance `radius`.
                const Eigen::VectorXd d = s_gn - s_c;
                const double a = d.squaredNorm();
                const double b = 2.0 * s_c.dot(d);
                const double c = s_c.squaredNorm() - radius * radius;
                const double tau = (-b + std::sqrt(std::max(0.0, b * b - 4.0 * a * c))) / (2.0 * a);
                s_scaled = s_c + tau * d;
            }
        }

        Eigen::VectorXd trial = p;
        for (Eigen::Index k = 0; k < nf; ++k) {
            const Eigen::Index i = free[k];
            const auto ui = static_cast<std::size_t>(i);
            trial[i] = reflect_into(p[i] + s_scaled[k] / diag[i], bounds.lower[ui], bounds.upper[ui]);
        }
        const Eigen::VectorXd step = trial - p;
        const double scaled_step = diag.cwiseProduct(step).norm();
        if (scaled_step <= options.xtol * (diag.cwiseProduct(p).norm() + options.xtol)) {
            out.termination = Termination::StepTolerance;
            break;
        }

        Eigen::VectorXd r_trial;
        eval(trial, r_trial, nullptr);
        const double cost_trial = all_finite(r_trial) ? 0.5 * r_trial.squaredNorm()
                                                      : std::numeric_limits<double>::infinity();
        // Reductions from residual differences keep precision near the optimum.
        const Eigen::VectorXd d = r_trial - r;
        const Eigen::VectorXd jstep = J * step;
        const double actual = std::isfinite(cost_trial) ? -(d.dot(r) + 0.5 * d.squaredNorm())
                                                        : -std::numeric_limits<double>::infinity();
        const double predicted = -(jstep.dot(r) + 0.5 * jstep.squaredNorm());
        const double rho = predicted > 0.0 ? actual / predicted : -1.0;

        if (rho < 0.25) {
            radius = 0.25 * scaled_step;
        } else if (rho > 0.75 && scaled_step >= 0.99 * radius) {
            radius = 2.0 * radius;
        }

        if (actual > 0.0 && rho > 1e-4) {
            p = trial;
            r = r_trial;
            cost = cost_trial;
            eval(p, r, &J);
            require(J.allFinite(), ErrorCode::NonFinite, "non-finite Jacobian during fit");
            const Eigen::VectorXd cn = J.colwise().norm().transpose();
            diag = diag.cwiseMax(cn);
            g = J.transpose() * r;
            frozen = active_set(p, g, bounds);
            if (options.record_history) out.cost_history.push_back(cost);
        }
        if (std::abs(actual) <= options.ftol * cost && predicted <= options.ftol * cost && rho <= 2.0) {
            out.termination = Termination::CostTolerance;
            break;
        }
    }
    out.converged = out.termination != Termination::MaxIterations;

    out.iterations = iter;
    out.cost = cost;
    out.params.assign(p.data(), p.data() + n);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
    const double dof = static_cast<double>(std::max<Eigen::Index>(m - n, 1));
    const double s2 = 2.0 * cost / dof;
    out.covariance_proxy.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) out.covariance_proxy[static_cast<std::size_t>(i)] = s2 * inv(i, i);
    return out;
}

FitResult least_squares_fit(const CurveModel& model, std::span<const double> init,
                            const Bounds& bounds, std::span<const double> x,
                            std::span<const double> y, const Options& options) {
    require(x.size() == y.size(), ErrorCode::LengthMismatch, "x and y differ in length");
    require(x.size() >= init.size(), ErrorCode::TooFewPoints, "fewer points than parameters");
    require(static_cast<bool>(model.value), ErrorCode::InvalidArgument, "model has no value function");
    const std::size_t n = init.size();

    ResidualFn fn = [&](std::span<const double> p, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        std::vector<double> grad(n);
        std::vector<double> shifted(p.begin(), p.end());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            r[row] = model.value(p, x[i]) - y[i];
            if (!J) continue;
            if (model.gradient) {
                model.gradient(p, x[i], grad);
            } else {
                for (std::size_t k = 0; k < n; ++k) {
                    const double h = 1e-6 * std::max(1.0, std::abs(p[k]));
                    shifted[k] = p[k] + h;
                    const double up = model.value(shifted, x[i]);
                    shifted[k] = p[k] - h;
                    const double down = model.value(shifted, x[i]);
                    shifted[k] = p[k];
                    grad[k] = (up - down) / (2.0 * h);
                }
            }
            for (std::size_t k = 0; k < n; ++k) (*J)(row, static_cast<Eigen::Index>(k)) = grad[k];
        }
    };
    return solve(fn, x.size(), init, bounds, options);
}

}  // namespace specdiff::lsq
