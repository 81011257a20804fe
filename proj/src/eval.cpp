#include "specdiff/eval.hpp"

#include "specdiff/baselines.hpp"
#include "specdiff/error.hpp"
#include "specdiff/search.hpp"
#include "specdiff/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specdiff::eval {

double shift_to_frequency(double lambda_a_nm, double lambda_b_nm) {
    require(lambda_a_nm > 0.0 && lambda_b_nm > 0.0, ErrorCode::NonPositiveValue, "wavelengths must be > 0");
    require(std::abs(lambda_a_nm - lambda_b_nm) <= kMaxWavelengthGap, ErrorCode::OutOfRange,
            "wavelengths must lie within 100 nm of each other");
    // (m/s) · nm / nm² comes out in GHz
    return kSpeedOfLight * std::abs(lambda_a_nm - lambda_b_nm) / (lambda_a_nm * lambda_b_nm);
}

std::vector<MismatchRow> mismatch_improvement(std::span<const double> actual,
                                              std::span<const double> predicted) {
    require(!predicted.empty() && actual.size() == predicted.size() + 1, ErrorCode::LengthMismatch,
            "actual segment must hold the origin plus one value per forecast step");
    std::vector<MismatchRow> rows;
    for (std::size_t k = 1; k < actual.size(); ++k) {
        MismatchRow r;
        r.step = k;
        r.actual_ghz = shift_to_frequency(actual[k - 1], actual[k]);
        r.residual_ghz = shift_to_frequency(actual[k], predicted[k - 1]);
        if (r.residual_ghz > 0.0) {
            r.factor = r.actual_ghz / r.residual_ghz;
        } else {
            r.factor = std::numeric_limits<double>::infinity();
            r.capped = true;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<MismatchRow> mismatch_improvement(const ZplTrace& actual, const forecast::ForecastResult& forecast) {
    require(forecast.predictions.size() == forecast.horizon, ErrorCode::LengthMismatch,
            "forecast holds fewer predictions than its horizon");
    return mismatch_improvement(actual.values(), forecast.predictions);
}

std::vector<std::size_t> forecast_origins(std::size_t first, std::size_t last, std::size_t horizon) {
    std::vector<std::size_t> out;
    if (first == 0) return out;
    for (std::size_t o = first - 1; o + horizon < last; o += horizon) out.push_back(o);
    return out;
}

namespace {

using forecast::ModelKind;

struct Scored {
    double ss = 0.0;
    std::size_t count = 0;

    double rmse() const { return std::sqrt(ss / static_cast<double>(count)); }
};

template <class Predict>
Scored score(const ZplTrace& trace, const std::vector<std::size_t>& origins, std::size_t horizon,
             Predict&& predict) {
    Scored s;
    const auto v = trace.values();
    for (std::size_t o : origins) {
        const std::vector<double> pred = predict(o);
        for (std::size_t k = 0; k < horizon; ++k) {
            const double e = pred[k] - v[o + 1 + k];
            s.ss += e * e;
            ++s.count;
        }
    }
    return s;
}

ZplTrace history_before(const ZplTrace& trace, std::size_t origin, std::size_t length) {
    const std::size_t n = std::min(length, origin + 1);
    return trace.slice(origin + 1 - n, n);
}

}  // namespace

EvalReport partition_benchmark(const ZplTrace& trace, const BenchmarkOptions& options) {
    require(options.horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
    require(!options.schemes.empty() && !options.models.empty(), ErrorCode::EmptySelection,
            "benchmark needs at least one scheme and one model");
    options.hp.validate();
    const std::size_t H = options.horizon;

    EvalReport report;
    for (std::size_t si = 0; si < options.schemes.size(); ++si) {
        const auto& scheme = options.schemes[si];
        const auto ranges = forecast::split_ranges(trace.size(), scheme);
        require(trace.size() - ranges.val_end >= H, ErrorCode::TooFewPoints,
                "scheme " + scheme.label() + " leaves fewer test samples than the horizon");
        const auto val_origins = forecast_origins(ranges.train_end, ranges.val_end, H);
        const auto test_origins = forecast_origins(ranges.val_end, trace.size(), H);
        require(!val_origins.empty() && !test_origins.empty(), ErrorCode::TooFewPoints,
                "scheme " + scheme.label() + " leaves no complete forecast in validation or test");

        const auto train_values = trace.values().subspan(0, ranges.train_end);
        const double mu = std::accumulate(train_values.begin(), train_values.end(), 0.0) /
                          static_cast<double>(train_values.size());
        double ss = 0.0;
        for (double x : train_values) ss += (x - mu) * (x - mu);
        const double sigma = std::sqrt(ss / static_cast<double>(train_values.size()));
        require(sigma > 0.0, ErrorCode::DegenerateData, "training split has zero variance");

        for (std::size_t mi = 0; mi < options.models.size(); ++mi) {
            const ModelKind kind = options.models[mi];
            ReportCell cell;
            cell.model = kind;
            cell.scheme = scheme;
            cell.origins = test_origins.size();
            const std::uint64_t cell_seed = derive_seed(options.seed, si * 16 + mi);

            std::function<std::vector<double>(std::size_t)> predict;
            forecast::TrainedForecaster model;
            if (kind == ModelKind::BiAttnLstm) {
                forecast::TrainOptions topt;
                topt.split = scheme;
                topt.seed = cell_seed;
                topt.max_epochs = options.max_epochs;
                topt.patience = options.patience;
                topt.horizon = static_cast<int>(H);
                if (options.hpo_trials > 0) {
                    forecast::SearchOptions sopt;
                    sopt.trials = options.hpo_trials;
                    sopt.train = topt;
                    model = forecast::hyperparameter_search(trace, forecast::SearchSpace{}, sopt).best;
                } else {
                    model = forecast::train(trace, options.hp, topt);
                }
                const auto L = static_cast<std::size_t>(model.hp.sequence_length);
                cell.window = L;
                predict = [&, L](std::size_t o) {
                    return forecast::autoregressive_forecast(model, history_before(trace, o, L), H, options.adapt)
                        .predictions;
                };
                cell.val_rmse_nm = score(trace, val_origins, H, predict).rmse();
            } else {
                const std::size_t need = forecast::min_history(kind);
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t w : options.baseline_windows) {
                    if (w < need || w > val_origins.front() + 1) continue;
                    auto p = [&, w](std::size_t o) {
                        return forecast::baseline_forecast(kind, history_before(trace, o, w), H).predictions;
                    };
                    const double r = score(trace, val_origins, H, p).rmse();
                    if (r < best) {
                        best = r;
                        cell.window = w;
                    }
                }
                require(cell.window > 0, ErrorCode::TooFewPoints,
                        "no baseline window fits before the validation split for " + forecast::to_string(kind));
                cell.val_rmse_nm = best;
                const std::size_t w = cell.window;
                predict = [&, w](std::size_t o) {
                    return forecast::baseline_forecast(kind, history_before(trace, o, w), H).predictions;
                };
            }
            cell.rmse_nm = score(trace, test_origins, H, predict).rmse();
            cell.rmse_norm = cell.rmse_nm / sigma;
            if (report.mismatch.empty()) {
                const std::size_t o = test_origins.front();
                report.mismatch =
                    mismatch_improvement(trace.values().subspan(o, H + 1), predict(o));
            }
            report.cells.push_back(cell);
        }
    }
    return report;
}

}  // namespace specdiff::eval
