#include "specdiff/forecaster.hpp"

#include "specdiff/error.hpp"
#include "specdiff/seeding.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <random>

namespace specdiff::forecast {

void Split::validate() const {
    require(train >= 1 && val >= 1 && test >= 1, ErrorCode::InvalidArgument, "each split part must be >= 1");
    require(train + val + test == 10, ErrorCode::InvalidArgument, "split parts must sum to 10");
}

std::string Split::label() const {
    return std::to_string(train) + ":" + std::to_string(val) + ":" + std::to_string(test);
}

SplitRanges split_ranges(std::size_t n, const Split& split) {
    split.validate();
    SplitRanges r;
    r.size = n;
    r.train_end = n * static_cast<std::size_t>(split.train) / 10;
    r.val_end = r.train_end + n * static_cast<std::size_t>(split.val) / 10;
    return r;
}

namespace {

double population_std(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / n);
}

std::vector<double> normalized(const ZplTrace& trace, const Normalizer& norm) {
    std::vector<double> z(trace.size());
    const auto v = trace.values();
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = norm.normalize(v[i]);
    return z;
}

struct Adam {
    explicit Adam(std::size_t n, double lr) : m(n, 0.0), v(n, 0.0), rate(lr) {}

    void step(std::vector<double>& theta, const std::vector<double>& grad) {
        ++t;
        const double c1 = 1.0 - std::pow(beta1, t);
        const double c2 = 1.0 - std::pow(beta2, t);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }

    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double eps = 1e-8;
    std::vector<double> m, v;
    double rate;
    int t = 0;
};

double rmse_over(const Network& net, std::span<const double> theta, const std::vector<double>& z,
                 std::size_t first, std::size_t last, std::size_t L) {
    ForwardCache cache;
    double ss = 0.0;
    for (std::size_t j = first; j < last; ++j) {
        const double y = net.forward(theta, std::span<const double>(z).subspan(j - L, L), cache);
        ss += (y - z[j]) * (y - z[j]);
    }
    return std::sqrt(ss / static_cast<double>(last - first));
}

}  // namespace

TrainedForecaster train(const ZplTrace& trace, const Hyperparams& hp, const TrainOptions& options) {
    hp.validate();
    options.split.validate();
    require(options.batch_size >= 1 && options.max_epochs >= 1 && options.patience >= 1,
            ErrorCode::InvalidArgument, "batch_size, max_epochs and patience must be >= 1");
    const auto L = static_cast<std::size_t>(hp.sequence_length);
    const std::size_t n = trace.size();
    require(n >= L + static_cast<std::size_t>(options.horizon) + 10, ErrorCode::TooFewPoints,
            "trace shorter than sequence_length + horizon + 10");
    const auto ranges = split_ranges(n, options.split);
    require(ranges.train_end > L, ErrorCode::TooFewPoints, "training split shorter than the input window");
    const std::size_t val_first = std::max(ranges.train_end, L);
    require(ranges.val_end > val_first, ErrorCode::TooFewPoints, "validation split is empty");

    TrainedForecaster model;
    model.hp = hp;
    const auto train_values = trace.values().subspan(0, ranges.train_end);
    model.norm.mean = std::accumulate(train_values.begin(), train_values.end(), 0.0) /
                      static_cast<double>(train_values.size());
    model.norm.std = population_std(train_values);
    require(model.norm.std > 1e-12 * std::max(1.0, std::abs(model.norm.mean)), ErrorCode::DegenerateData,
            "training split has zero variance");
    const auto z = normalized(trace, model.norm);

    std::vector<double> rolling;
    for (std::size_t i = 0; i + L <= ranges.train_end; ++i) {
        rolling.push_back(population_std(std::span<const double>(z).subspan(i, L)));
    }
    std::nth_element(rolling.begin(), rolling.begin() + static_cast<std::ptrdiff_t>(rolling.size() / 2),
                     rolling.end());
    model.reference_volatility = std::max(rolling[rolling.size() / 2], 1e-12);

    const Network net(hp);
    std::vector<double> theta = net.initialize(derive_seed(options.seed, 0));
    std::mt19937_64 shuffle_rng(derive_seed(options.seed, 1));
    std::mt19937_64 dropout_rng(derive_seed(options.seed, 2));
    Adam adam(theta.size(), hp.learning_rate);

    std::vector<std::size_t> order;
    for (std::size_t j = L; j < ranges.train_end; ++j) order.push_back(j);

    std::vector<double> best = theta;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    std::vector<double> grad(theta.size());
    ForwardCache cache;
    const auto batch = static_cast<std::size_t>(options.batch_size);
    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_ss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t stop = std::min(order.size(), start + batch);
            const double scale = 2.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t j = order[k];
                const double y = net.forward(theta, std::span<const double>(z).subspan(j - L, L), cache,
                                             hp.dropout > 0.0 ? &dropout_rng : nullptr);
                const double err = y - z[j];
                epoch_ss += err * err;
                net.backward(theta, cache, scale * err, grad);
            }
            adam.step(theta, grad);
        }
        const double train_rmse = std::sqrt(epoch_ss / static_cast<double>(order.size()));
        const double val_rmse = rmse_over(net, theta, z, val_first, ranges.val_end, L);
        require(std::isfinite(train_rmse) && std::isfinite(val_rmse), ErrorCode::Diverged,
                "loss became non-finite at epoch " + std::to_string(epoch));
        model.meta.train_rmse.push_back(train_rmse);
        model.meta.val_rmse.push_back(val_rmse);
        model.meta.epochs_run = epoch;
        if (val_rmse < best_val - options.min_delta) {
            best_val = val_rmse;
            best = theta;
            model.meta.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= options.patience) {
            break;
        }
    }
    model.parameters = std::move(best);
    model.meta.best_val_rmse = best_val;
    return model;
}

Prediction forward(const TrainedForecaster& model, std::span<const double> window) {
    const Network net = model.network();
    ForwardCache cache;
    Prediction p;
    p.value = net.forward(model.parameters, window, cache);
    p.attention.assign(cache.alpha.data(), cache.alpha.data() + cache.alpha.size());
    return p;
}

double one_step_rmse(const TrainedForecaster& model, const ZplTrace& trace, std::size_t first,
                     std::size_t last) {
    const auto L = static_cast<std::size_t>(model.hp.sequence_length);
    require(first >= L && last > first && last <= trace.size(), ErrorCode::OutOfRange,
            "evaluation range needs a full input window before it");
    const auto z = normalized(trace, model.norm);
    return rmse_over(model.network(), model.parameters, z, first, last, L);
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::BiAttnLstm: return "bi-attn-lstm";
        case ModelKind::Linear: return "linear";
        case ModelKind::Poly5: return "poly5";
        case ModelKind::Sine: return "sine";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    for (auto k : {ModelKind::BiAttnLstm, ModelKind::Linear, ModelKind::Poly5, ModelKind::Sine}) {
        if (to_string(k) == name) return k;
    }
    fail(ErrorCode::InvalidArgument, "unknown model kind '" + name + "'");
}

int adaptive_window(const TrainedForecaster& model, std::span<const double> recent) {
    const int L = model.hp.sequence_length;
    const double sigma = population_std(recent);
    if (!(sigma > kVolatilityTrigger * model.reference_volatility)) return L;
    const int lo = std::min(kMinAdaptiveWindow, L);
    const auto scaled = static_cast<int>(std::lround(L * model.reference_volatility / sigma));
    return std::clamp(scaled, lo, L);
}

ForecastResult autoregressive_forecast(const TrainedForecaster& model, const ZplTrace& history,
                                       std::size_t horizon, bool adapt) {
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
    const auto L = static_cast<std::size_t>(model.hp.sequence_length);
    require(history.size() >= L, ErrorCode::TooFewPoints, "history shorter than the input window");
    const Network net = model.network();

    const auto v = history.values();
    std::vector<double> buffer;
    for (std::size_t i = history.size() - L; i < history.size(); ++i) buffer.push_back(model.norm.normalize(v[i]));

    ForecastResult out;
    out.horizon = horizon;
    out.model_kind = ModelKind::BiAttnLstm;
    const double t_last = history.timestamps().back();
    ForwardCache cache;
    for (std::size_t k = 0; k < horizon; ++k) {
        const std::span<const double> recent(buffer.data() + buffer.size() - L, L);
        const auto len = adapt ? static_cast<std::size_t>(adaptive_window(model, recent)) : L;
        const double y = net.forward(model.parameters, recent.subspan(L - len, len), cache);
        buffer.push_back(y);
        out.predictions.push_back(model.norm.denormalize(y));
        out.timestamps.push_back(t_last + static_cast<double>(k + 1) * history.step());
        out.attention_maps.emplace_back(cache.alpha.data(), cache.alpha.data() + cache.alpha.size());
        out.window_lengths.push_back(len);
    }
    return out;
}

// ---------------------------------------------------------------------------

double loss_and_gradient(const Network& net, std::span<const double> theta, const Batch& batch,
                         std::span<double> grad) {
    require(!batch.targets.empty() && batch.windows.size() == batch.targets.size(), ErrorCode::LengthMismatch,
            "batch windows and targets differ");
    std::fill(grad.begin(), grad.end(), 0.0);
    const double scale = 1.0 / static_cast<double>(batch.targets.size());
    ForwardCache cache;
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.targets.size(); ++i) {
        const double err = net.forward(theta, batch.windows[i], cache) - batch.targets[i];
        loss += scale * err * err;
        net.backward(theta, cache, 2.0 * scale * err, grad);
    }
    return loss;
}

GradientCheckReport gradient_check(const Hyperparams& hp_in, std::uint64_t seed, std::size_t n_params_sampled,
                                   double fd_step) {
    Hyperparams hp = hp_in;
    hp.dropout = 0.0;
    hp.validate();
    require(hp.hidden_size <= 8 && hp.sequence_length <= 6, ErrorCode::InvalidArgument,
            "gradient check expects a small model (h <= 8, L <= 6)");
    require(fd_step > 0.0, ErrorCode::InvalidArgument, "fd_step must be > 0");
    const Network net(hp);
    std::vector<double> theta = net.initialize(derive_seed(seed, 0));

    std::mt19937_64 rng(derive_seed(seed, 1));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Batch batch;
    for (int i = 0; i < 4; ++i) {
        std::vector<double> w(static_cast<std::size_t>(hp.sequence_length));
        for (double& x : w) x = gauss(rng);
        batch.windows.push_back(std::move(w));
        batch.targets.push_back(gauss(rng));
    }
    std::vector<double> grad(theta.size());
    loss_and_gradient(net, theta, batch, grad);

    std::vector<std::size_t> idx(theta.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n_params_sampled, idx.size()));
    std::sort(idx.begin(), idx.end());

    GradientCheckReport report;
    std::vector<double> scratch(theta.size());
    for (std::size_t i : idx) {
        const double saved = theta[i];
        theta[i] = saved + fd_step;
        const double up = loss_and_gradient(net, theta, batch, scratch);
        theta[i] = saved - fd_step;
        const double down = loss_and_gradient(net, theta, batch, scratch);
        theta[i] = saved;
        const double numeric = (up - down) / (2.0 * fd_step);
        const double abs_err = std::abs(grad[i] - numeric);
        const double rel = abs_err / std::max({std::abs(grad[i]), std::abs(numeric), kGradientFloor});
        report.max_absolute_error = std::max(report.max_absolute_error, abs_err);
        report.max_relative_error = std::max(report.max_relative_error, rel);
        report.sum_absolute_error += abs_err;
        ++report.checked;
    }
    return report;
}

}  // namespace specdiff::forecast
