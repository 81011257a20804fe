#include "specdiff/serialize.hpp"

#include "specdiff/error.hpp"
#include "specdiff/io.hpp"

#include <cmath>

namespace specdiff::serialize {

namespace {

// JSON has no infinities; they are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
T get(const json& j, const char* key) {
    require(j.contains(key), ErrorCode::MalformedHeader, std::string("missing key '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::MalformedHeader, std::string("key '") + key + "': " + e.what());
    }
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = get<T>(j, key);
}

}  // namespace

json to_json(const forecast::Hyperparams& hp) {
    return {{"hidden_size", hp.hidden_size},
            {"sequence_length", hp.sequence_length},
            {"num_layers", hp.num_layers},
            {"dropout", hp.dropout},
            {"learning_rate", hp.learning_rate}};
}

forecast::Hyperparams hyperparams_from_json(const json& j) {
    forecast::Hyperparams hp;
    hp.hidden_size = get<int>(j, "hidden_size");
    hp.sequence_length = get<int>(j, "sequence_length");
    hp.num_layers = get<int>(j, "num_layers");
    hp.dropout = get<double>(j, "dropout");
    hp.learning_rate = get<double>(j, "learning_rate");
    hp.validate();
    return hp;
}

json to_json(const forecast::TrainedForecaster& model) {
    json layout = json::array();
    const auto net = model.network();
    for (const auto& t : net.tensors()) {
        layout.push_back({{"name", t.name}, {"rows", t.rows}, {"cols", t.cols}, {"offset", t.offset}});
    }
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"hp", to_json(model.hp)},
            {"norm", {{"mean", model.norm.mean}, {"std", model.norm.std}}},
            {"reference_volatility", model.reference_volatility},
            {"layout", layout},
            {"parameters", model.parameters},
            {"meta",
             {{"epochs_run", model.meta.epochs_run},
              {"best_epoch", model.meta.best_epoch},
              {"best_val_rmse", number(model.meta.best_val_rmse)},
              {"train_rmse", model.meta.train_rmse},
              {"val_rmse", model.meta.val_rmse}}}};
}

forecast::TrainedForecaster forecaster_from_json(const json& j) {
    require(j.is_object() && j.value("format", "") == kCheckpointFormat, ErrorCode::MalformedHeader,
            "not a forecaster checkpoint");
    const int version = get<int>(j, "version");
    require(version == kCheckpointVersion, ErrorCode::MalformedHeader,
            "unsupported checkpoint version " + std::to_string(version));
    forecast::TrainedForecaster m;
    m.hp = hyperparams_from_json(get<json>(j, "hp"));
    const auto norm = get<json>(j, "norm");
    m.norm.mean = get<double>(norm, "mean");
    m.norm.std = get<double>(norm, "std");
    require(m.norm.std > 0.0, ErrorCode::NonPositiveValue, "checkpoint norm std must be > 0");
    m.reference_volatility = get<double>(j, "reference_volatility");
    m.parameters = get<std::vector<double>>(j, "parameters");

    const auto net = m.network();
    require(m.parameters.size() == net.parameter_count(), ErrorCode::LengthMismatch,
            "checkpoint parameter count does not match its hyperparameters");
    const auto layout = get<json>(j, "layout");
    require(layout.size() == net.tensors().size(), ErrorCode::LengthMismatch, "checkpoint layout size mismatch");
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& t = net.tensors()[i];
        require(get<std::string>(layout[i], "name") == t.name && get<Eigen::Index>(layout[i], "rows") == t.rows &&
                    get<Eigen::Index>(layout[i], "cols") == t.cols &&
                    get<std::size_t>(layout[i], "offset") == t.offset,
                ErrorCode::LengthMismatch, "checkpoint tensor '" + t.name + "' has an unexpected shape");
    }
    for (double p : m.parameters) require(std::isfinite(p), ErrorCode::NonFinite, "checkpoint has non-finite weights");

    if (j.contains("meta")) {
        const auto& meta = j.at("meta");
        maybe(meta, "epochs_run", m.meta.epochs_run);
        maybe(meta, "best_epoch", m.meta.best_epoch);
        if (meta.contains("best_val_rmse") && !meta.at("best_val_rmse").is_null()) {
            m.meta.best_val_rmse = get<double>(meta, "best_val_rmse");
        }
        maybe(meta, "train_rmse", m.meta.train_rmse);
        maybe(meta, "val_rmse", m.meta.val_rmse);
    }
    return m;
}

void save_checkpoint(const forecast::TrainedForecaster& model, const std::filesystem::path& path) {
    io::write_text(path, dump(to_json(model)));
}

forecast::TrainedForecaster load_checkpoint(const std::filesystem::path& path) {
    const std::string text = io::read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::MalformedHeader, path.string() + ": " + e.what());
    }
    return forecaster_from_json(j);
}

json to_json(const forecast::ForecastResult& r) {
    return {{"model", forecast::to_string(r.model_kind)},
            {"horizon", r.horizon},
            {"predictions_nm", r.predictions},
            {"t_s", r.timestamps},
            {"window_lengths", r.window_lengths},
            {"attention", r.attention_maps}};
}

json to_json(const std::vector<forecast::TrialRecord>& log) {
    json out = json::array();
    for (const auto& t : log) {
        out.push_back({{"trial", t.trial},
                       {"hp", to_json(t.hp)},
                       {"val_rmse", number(t.val_rmse)},
                       {"epochs", t.epochs},
                       {"status", t.status}});
    }
    return out;
}

json to_json(const g2::G2Fit& fit) {
    return {{"g2_0", fit.g2_0},
            {"tau_antibunch_s", fit.tau_antibunch},
            {"g2_inf", fit.g2_inf},
            {"residual_rms", fit.residual_rms},
            {"converged", fit.converged},
            {"single_photon", fit.g2_0 < 0.5}};
}

json to_json(const noise::PowerLawFit& fit) {
    return {{"exponent", fit.exponent},
            {"intercept_log10", fit.intercept},
            {"fit_range", {fit.fit_range.first, fit.fit_range.second}},
            {"r_squared", number(fit.r_squared)},
            {"rms_log10", fit.rms}};
}

json to_json(const noise::SegmentedPsdFit& fit, const noise::PsdResult& psd) {
    json segs = json::array();
    for (const auto& s : fit.segments) {
        segs.push_back({{"first_bin", s.first},
                        {"last_bin", s.last},
                        {"f_lo_hz", psd.freqs[s.first]},
                        {"f_hi_hz", psd.freqs[s.last]},
                        {"alpha", -s.fit.exponent},
                        {"fit", to_json(s.fit)}});
    }
    json breaks = json::array();
    for (auto cp : fit.change_points) breaks.push_back({{"bin", cp}, {"freq_hz", psd.freqs[cp]}});
    return {{"change_points", breaks},
            {"segments", segs},
            {"total_rms_log10", fit.total_rms},
            {"rms_by_count", fit.rms_by_count}};
}

json to_json(const Histogram& h) {
    return {{"bin_edges", h.bin_edges}, {"counts", h.counts}, {"total", h.total}};
}

json to_json(const replica::OverlapEvolution& e) {
    json hs = json::array();
    for (const auto& h : e.histograms) hs.push_back(h.counts);
    return {{"window_len", e.window_len},
            {"stride", e.stride},
            {"window_starts", e.window_starts},
            {"bin_edges", e.bin_edges},
            {"counts", hs}};
}

json to_json(const std::vector<eval::MismatchRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"step", r.step},
                       {"actual_ghz", r.actual_ghz},
                       {"residual_ghz", r.residual_ghz},
                       {"factor", number(r.factor)},
                       {"capped", r.capped}});
    }
    return out;
}

json to_json(const eval::EvalReport& report) {
    json cells = json::array();
    for (const auto& c : report.cells) {
        cells.push_back({{"model", forecast::to_string(c.model)},
                         {"scheme", c.scheme.label()},
                         {"rmse_norm", c.rmse_norm},
                         {"rmse_nm", c.rmse_nm},
                         {"val_rmse_nm", c.val_rmse_nm},
                         {"origins", c.origins},
                         {"window", c.window}});
    }
    return {{"cells", cells}, {"mismatch", to_json(report.mismatch)}};
}

json to_json(const sim::FluctuatorBathConfig& c) {
    return {{"n_fluctuators", c.n_fluctuators},
            {"rate_range", {c.rate_range.first, c.rate_range.second}},
            {"coupling_scale", c.coupling_scale},
            {"base_wavelength", c.base_wavelength},
            {"drift", {{"reversion_rate", c.drift.reversion_rate}, {"diffusion", c.drift.diffusion}}},
            {"measurement_noise", c.measurement_noise},
            {"fs", c.fs},
            {"n_frames", c.n_frames},
            {"asymmetry", c.asymmetry}};
}

json to_json(const sim::FrameRenderConfig& c) {
    return {{"axis_range", {c.axis_range.first, c.axis_range.second}},
            {"n_bins", c.n_bins},
            {"zpl_fwhm", c.zpl_fwhm},
            {"zpl_amplitude", c.zpl_amplitude},
            {"raman_center", c.raman_center},
            {"raman_fwhm", c.raman_fwhm},
            {"raman_amplitude", c.raman_amplitude},
            {"background", c.background},
            {"shot_noise", c.shot_noise}};
}

void apply(const json& j, sim::FluctuatorBathConfig& c) {
    require(j.is_object(), ErrorCode::InvalidArgument, "bath config must be a JSON object");
    maybe(j, "n_fluctuators", c.n_fluctuators);
    if (j.contains("rate_range")) {
        const auto r = get<std::vector<double>>(j, "rate_range");
        require(r.size() == 2, ErrorCode::InvalidArgument, "rate_range needs two values");
        c.rate_range = {r[0], r[1]};
    }
    maybe(j, "coupling_scale", c.coupling_scale);
    maybe(j, "base_wavelength", c.base_wavelength);
    if (j.contains("drift")) {
        maybe(j.at("drift"), "reversion_rate", c.drift.reversion_rate);
        maybe(j.at("drift"), "diffusion", c.drift.diffusion);
    }
    maybe(j, "measurement_noise", c.measurement_noise);
    maybe(j, "fs", c.fs);
    maybe(j, "n_frames", c.n_frames);
    maybe(j, "asymmetry", c.asymmetry);
    c.validate();
}

void apply(const json& j, sim::FrameRenderConfig& c) {
    require(j.is_object(), ErrorCode::InvalidArgument, "render config must be a JSON object");
    if (j.contains("axis_range")) {
        const auto r = get<std::vector<double>>(j, "axis_range");
        require(r.size() == 2, ErrorCode::InvalidArgument, "axis_range needs two values");
        c.axis_range = {r[0], r[1]};
    }
    maybe(j, "n_bins", c.n_bins);
    maybe(j, "zpl_fwhm", c.zpl_fwhm);
    maybe(j, "zpl_amplitude", c.zpl_amplitude);
    maybe(j, "raman_center", c.raman_center);
    maybe(j, "raman_fwhm", c.raman_fwhm);
    maybe(j, "raman_amplitude", c.raman_amplitude);
    maybe(j, "background", c.background);
    maybe(j, "shot_noise", c.shot_noise);
    c.validate();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace specdiff::serialize
