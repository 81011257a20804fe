#include "specdiff/baselines.hpp"

#include "specdiff/error.hpp"
#include "specdiff/least_squares.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

namespace specdiff::forecast {

double SineParams::operator()(double t) const {
    return amplitude * std::sin(omega * t + phase) + offset;
}

namespace {

double wrap_phase(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    if (phi <= -std::numbers::pi) phi += two_pi;
    if (phi > std::numbers::pi) phi -= two_pi;
    return phi;
}

lsq::CurveModel sine_model() {
    lsq::CurveModel m;
    m.value = [](std::span<const double> p, double t) { return p[0] * std::sin(p[1] * t + p[2]) + p[3]; };
    m.gradient = [](std::span<const double> p, double t, std::span<double> g) {
        const double s = std::sin(p[1] * t + p[2]);
        const double c = std::cos(p[1] * t + p[2]);
        g[0] = s;
        g[1] = p[0] * t * c;
        g[2] = p[0] * c;
        g[3] = 1.0;
    };
    return m;
}

}  // namespace

SineParams fit_sine(std::span<const double> t, std::span<const double> y) {
    require(t.size() == y.size(), ErrorCode::LengthMismatch, "sine fit: t and y differ in length");
    const std::size_t n = y.size();
    require(n >= 4, ErrorCode::TooFewPoints, "sine fit needs at least 4 samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    require(dt > 0.0, ErrorCode::InvalidArgument, "sine fit: time axis must increase");

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    std::size_t best_k = 1;
    std::complex<double> best_x{0.0, 0.0};
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * dt);
        std::complex<double> x{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) x += (y[i] - mean) * std::polar(1.0, -w * (t[i] - t[0]));
        if (std::abs(x) > std::abs(best_x)) {
            best_x = x;
            best_k = k;
        }
    }
    const double omega_max = std::numbers::pi / dt;
    const double omega0 =
        std::min(omega_max, 2.0 * std::numbers::pi * static_cast<double>(best_k) / (static_cast<double>(n) * dt));
    const double amp0 = std::max(2.0 * std::abs(best_x) / static_cast<double>(n), 1e-12);
    const double phase0 = std::arg(best_x) + std::numbers::pi / 2.0;

    std::vector<double> rel(n);
    for (std::size_t i = 0; i < n; ++i) rel[i] = t[i] - t[0];
    constexpr double inf = std::numeric_limits<double>::infinity();
    lsq::Bounds bounds{{0.0, 1e-9 * omega_max, -inf, -inf}, {inf, omega_max, inf, inf}};
    const std::vector<double> init{amp0, omega0, phase0, mean};
    const auto fit = lsq::least_squares_fit(sine_model(), init, bounds, rel, y);

    SineParams p;
    p.amplitude = fit.params[0];
    p.omega = fit.params[1];
    p.phase = wrap_phase(fit.params[2]);
    p.offset = fit.params[3];
    p.converged = fit.converged;
    return p;
}

std::vector<double> polynomial_extrapolate(std::span<const double> y, int degree,
                                           std::span<const double> at_indices) {
    require(degree >= 0, ErrorCode::InvalidArgument, "polynomial degree must be >= 0");
    const auto n = static_cast<Eigen::Index>(y.size());
    require(n > degree, ErrorCode::TooFewPoints, "polynomial fit needs more samples than its degree");
    const double centre = 0.5 * static_cast<double>(n - 1);
    const double scale = std::max(1.0, centre);

    Eigen::MatrixXd A(n, degree + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (static_cast<double>(i) - centre) / scale;
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            A(i, d) = p;
            p *= u;
        }
        b(i) = y[static_cast<std::size_t>(i)];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    require(qr.rank() == degree + 1, ErrorCode::SingularMatrix, "polynomial design matrix is rank deficient");
    const Eigen::VectorXd coef = qr.solve(b);

    std::vector<double> out;
    for (double idx : at_indices) {
        const double u = (idx - centre) / scale;
        double acc = 0.0;
        for (int d = degree; d >= 0; --d) acc = acc * u + coef(d);
        out.push_back(acc);
    }
    return out;
}

std::size_t min_history(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear: return 2;
        case ModelKind::Poly5: return 6;
        case ModelKind::Sine: return 4;
        case ModelKind::BiAttnLstm: break;
    }
    fail(ErrorCode::InvalidArgument, "not a baseline model: " + to_string(kind));
}

ForecastResult baseline_forecast(ModelKind kind, const ZplTrace& history, std::size_t horizon,
                                 std::size_t window) {
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
    const std::size_t need = min_history(kind);
    const std::size_t n = window == 0 ? history.size() : std::min(window, history.size());
    require(n >= need, ErrorCode::TooFewPoints,
            to_string(kind) + " baseline needs at least " + std::to_string(need) + " history points");
    const auto y = history.values().subspan(history.size() - n, n);

    ForecastResult out;
    out.model_kind = kind;
    out.horizon = horizon;
    const double step = history.step();
    const double t_last = history.timestamps().back();
    for (std::size_t k = 1; k <= horizon; ++k) out.timestamps.push_back(t_last + static_cast<double>(k) * step);
    out.window_lengths.assign(horizon, n);

    if (kind == ModelKind::Sine) {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * step;
        const auto p = fit_sine(t, y);
        for (std::size_t k = 1; k <= horizon; ++k) out.predictions.push_back(p(static_cast<double>(n - 1 + k) * step));
        return out;
    }
    std::vector<double> at;
    for (std::size_t k = 1; k <= horizon; ++k) at.push_back(static_cast<double>(n - 1 + k));
    out.predictions = polynomial_extrapolate(y, kind == ModelKind::Linear ? 1 : 5, at);
    return out;
}

}  // namespace specdiff::forecast
