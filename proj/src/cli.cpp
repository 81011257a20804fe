#include "specdiff/cli.hpp"

#include "specdiff/baselines.hpp"
#include "specdiff/error.hpp"
#include "specdiff/eval.hpp"
#include "specdiff/forecaster.hpp"
#include "specdiff/g2.hpp"
#include "specdiff/io.hpp"
#include "specdiff/noise.hpp"
#include "specdiff/peakfit.hpp"
#include "specdiff/replica.hpp"
#include "specdiff/search.hpp"
#include "specdiff/seeding.hpp"
#include "specdiff/serialize.hpp"
#include "specdiff/simulator.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

namespace specdiff::cli {

namespace fs = std::filesystem;
using serialize::json;

namespace {

using Window = std::pair<double, double>;

// Files written by a subcommand; removed again unless the run succeeds.
class Outputs {
public:
    Outputs() = default;
    Outputs(const Outputs&) = delete;
    Outputs& operator=(const Outputs&) = delete;
    ~Outputs() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : paths_) fs::remove(p, ec);
    }

    const fs::path& add(fs::path p) { return paths_.emplace_back(std::move(p)); }
    void commit() { committed_ = true; }

private:
    std::vector<fs::path> paths_;
    bool committed_ = false;
};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out;
};

fs::path default_dir() {
    const char* env = std::getenv(kOutDirEnv);
    return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

fs::path out_path(const Common& c, const char* default_name) {
    return c.out.empty() ? default_dir() / default_name : fs::path(c.out);
}

// foo/bar.csv + "_fit.json" -> foo/bar_fit.json
fs::path sibling(const fs::path& p, const std::string& suffix) {
    return p.parent_path() / (p.stem().string() + suffix);
}

std::uint64_t need_seed(const Common& c, const std::string& sub) {
    require(c.seed.has_value(), ErrorCode::InvalidArgument, "seed required for stochastic subcommand '" + sub + "'");
    return *c.seed;
}

forecast::Split parse_split(const std::string& text) {
    forecast::Split s;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    in >> s.train >> c1 >> s.val >> c2 >> s.test;
    require(in && c1 == ':' && c2 == ':' && in.peek() == std::char_traits<char>::eof(), ErrorCode::InvalidArgument,
            "partition scheme '" + text + "' must look like 8:1:1");
    s.validate();
    return s;
}

void write_csv(Outputs& outs, const fs::path& path, std::initializer_list<std::string> header,
               const std::vector<std::vector<double>>& cols) {
    const std::vector<std::string> h(header);
    io::write_table(outs.add(path), h, cols);
}

void write_json(Outputs& outs, const fs::path& path, const json& j) {
    io::write_text(outs.add(path), serialize::dump(j));
}

std::vector<double> to_double(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string preset = "stable";
    std::size_t frames = 0;
    std::string kind = "spectra";
    std::string truth;
};

void do_simulate(const Common& c, const SimulateArgs& a, const json& block, Outputs& outs) {
    const std::uint64_t seed = need_seed(c, "simulate");
    auto p = sim::preset(a.preset);
    if (block.contains("bath")) serialize::apply(block.at("bath"), p.bath);
    if (block.contains("render")) serialize::apply(block.at("render"), p.render);
    if (a.frames > 0) p.bath.n_frames = a.frames;
    require(a.kind == "spectra" || a.kind == "trace", ErrorCode::InvalidArgument, "--kind must be spectra or trace");

    const auto trace = sim::simulate_fluctuator_bath(p.bath, seed);
    if (a.kind == "trace") {
        io::write_zpl_trace(trace, outs.add(out_path(c, "trace.csv")));
    } else {
        const auto series = sim::synthesize_spectra(trace, p.render, derive_seed(seed, 0x5bec7a));
        io::write_spectral_series(series, outs.add(out_path(c, "spectra.csv")));
    }
    if (!a.truth.empty()) io::write_zpl_trace(trace, outs.add(a.truth));
}

struct ExtractArgs {
    std::string input;
    Window zpl{538.8, 540.3};
    Window ref{547.0, 547.9};
    std::string ref_out;
};

void do_extract(const Common& c, const ExtractArgs& a, Outputs& outs) {
    const auto series = io::parse_spectral_series(a.input);
    const auto ex = peakfit::extract_traces(series, {a.zpl.first, a.zpl.second}, {a.ref.first, a.ref.second});
    const auto path = out_path(c, "zpl_trace.csv");
    io::write_zpl_trace(ex.zpl, outs.add(path));
    io::write_zpl_trace(ex.reference, outs.add(a.ref_out.empty() ? sibling(path, "_ref.csv") : fs::path(a.ref_out)));
    std::cout << "frames=" << series.n_frames() << " zpl_failed=" << ex.zpl_failed
              << " reference_failed=" << ex.reference_failed << "\n";
}

struct OverlapArgs {
    std::string input;
    std::size_t window = 100;
    std::size_t stride = 10;
    std::size_t bins = replica::kDefaultBins;
    std::optional<Window> wl;
    bool single = false;
};

void do_overlap(const Common& c, const OverlapArgs& a, Outputs& outs) {
    const auto series = io::parse_spectral_series(a.input);
    if (a.single) {
        const auto m = replica::series_overlap(series, a.wl);
        auto j = serialize::to_json(replica::overlap_histogram(m, a.bins));
        j["excluded_pairs"] = m.excluded_pairs;
        j["n_replicas"] = m.window_len;
        write_json(outs, out_path(c, "overlap.json"), j);
        return;
    }
    replica::EvolutionOptions opt;
    opt.window_len = a.window;
    opt.stride = a.stride;
    opt.bins = a.bins;
    opt.wavelength_window = a.wl;
    const auto evo = replica::sliding_overlap_evolution(series, opt);
    std::vector<std::vector<double>> cols{to_double(evo.window_starts)};
    std::vector<std::string> header{"window_start"};
    for (std::size_t b = 0; b < a.bins; ++b) {
        header.push_back("bin_" + std::to_string(b));
        std::vector<double> col;
        for (const auto& h : evo.histograms) col.push_back(static_cast<double>(h.counts[b]));
        cols.push_back(std::move(col));
    }
    io::write_table(outs.add(out_path(c, "overlap_evolution.csv")), header, cols);
}

struct AcfArgs {
    std::string input;
    std::size_t max_lag = 0;
    std::optional<std::pair<std::size_t, std::size_t>> fit;
};

std::size_t default_max_lag(std::size_t n) { return std::min<std::size_t>(200, (n - 1) / 2); }

// Power-law fit over the decay region, lags 1 .. first band crossing − 1;
// null when that region is too short or holds non-positive values.
json decay_fit(const noise::AcfResult& r) {
    const std::size_t last = std::max<std::size_t>(2, noise::first_band_crossing(r) - 1);
    if (last >= r.r.size()) return nullptr;
    for (std::size_t k = 1; k <= last; ++k) {
        if (!(r.r[k] > 0.0)) return nullptr;
    }
    return serialize::to_json(noise::fit_acf_power_law(r, 1, last));
}

void do_acf(const Common& c, const AcfArgs& a, Outputs& outs) {
    const auto trace = io::parse_zpl_trace(a.input);
    const auto r = noise::acf(trace, a.max_lag > 0 ? a.max_lag : default_max_lag(trace.size()));
    const auto path = out_path(c, "acf.csv");
    write_csv(outs, path, {"lag", "r", "band"}, {to_double(r.lags), r.r, r.band});
    json j = a.fit ? serialize::to_json(noise::fit_acf_power_law(r, a.fit->first, a.fit->second)) : decay_fit(r);
    j = {{"first_band_crossing", noise::first_band_crossing(r)}, {"fit", j}};
    write_json(outs, sibling(path, "_fit.json"), j);
}

struct PsdArgs {
    std::string input;
    bool detrend = false;
    std::size_t segments = 1;
    std::size_t change_points = noise::kMaxChangePoints;
    std::size_t min_segment = noise::kDefaultMinSegment;
    bool exact = false;
    std::optional<Window> band;
};

noise::SegmentOptions segment_options(const PsdArgs& a) {
    noise::SegmentOptions s;
    s.max_change_points = a.change_points;
    s.min_segment = a.min_segment;
    s.selection = a.exact ? noise::ChangePointSelection::Exact : noise::ChangePointSelection::Bic;
    s.band = a.band;
    return s;
}

void do_psd(const Common& c, const PsdArgs& a, Outputs& outs) {
    const auto trace = io::parse_zpl_trace(a.input);
    const auto psd = noise::periodogram_psd(trace, {a.detrend, a.segments});
    const auto path = out_path(c, "psd.csv");
    write_csv(outs, path, {"freq_hz", "power"}, {psd.freqs, psd.power});
    const auto fit = noise::fit_psd_segments(psd, segment_options(a));
    write_json(outs, sibling(path, "_fit.json"), serialize::to_json(fit, psd));
}

struct G2Args {
    std::string input;
};

void do_g2fit(const Common& c, const G2Args& a, Outputs& outs) {
    const auto data = io::parse_g2(a.input);
    write_json(outs, out_path(c, "g2_fit.json"), serialize::to_json(g2::fit_g2(data.delays, data.values)));
}

struct ModelArgs {
    forecast::Hyperparams hp;
    std::string split = "8:1:1";
    int max_epochs = 500;
    int patience = 20;
    int batch = 32;
    int horizon = 8;
    int trials = 0;
};

void add_model_options(CLI::App* sub, ModelArgs& m) {
    sub->add_option("--hidden", m.hp.hidden_size, "LSTM units per direction")->capture_default_str();
    sub->add_option("--seq-len", m.hp.sequence_length, "input window length L")->capture_default_str();
    sub->add_option("--layers", m.hp.num_layers, "stacked Bi-LSTM layers")->capture_default_str();
    sub->add_option("--dropout", m.hp.dropout, "dropout rate")->capture_default_str();
    sub->add_option("--lr", m.hp.learning_rate, "Adam learning rate")->capture_default_str();
    sub->add_option("--max-epochs", m.max_epochs)->capture_default_str();
    sub->add_option("--patience", m.patience)->capture_default_str();
    sub->add_option("--horizon", m.horizon, "forecast steps")->capture_default_str();
    sub->add_option("--trials", m.trials, "random-search trials (0 = train the given hyperparameters)")
        ->capture_default_str();
}

forecast::SearchSpace search_space(const json& block) {
    forecast::SearchSpace s;
    if (!block.contains("space")) return s;
    const auto& j = block.at("space");
    auto ints = [&](const char* key, forecast::IntRange& r) {
        if (!j.contains(key)) return;
        const auto v = j.at(key).get<std::vector<int>>();
        require(v.size() == 2, ErrorCode::InvalidArgument, std::string("space.") + key + " needs [lo, hi]");
        r = {v[0], v[1]};
    };
    auto reals = [&](const char* key, forecast::RealRange& r) {
        if (!j.contains(key)) return;
        const auto v = j.at(key).get<std::vector<double>>();
        require(v.size() == 2, ErrorCode::InvalidArgument, std::string("space.") + key + " needs [lo, hi]");
        r.lo = v[0];
        r.hi = v[1];
    };
    ints("hidden_size", s.hidden_size);
    ints("sequence_length", s.sequence_length);
    ints("num_layers", s.num_layers);
    reals("dropout", s.dropout);
    reals("learning_rate", s.learning_rate);
    s.validate();
    return s;
}

struct TrainArgs {
    std::string input;
    ModelArgs m;
};

void do_train(const Common& c, const TrainArgs& a, const json& block, Outputs& outs) {
    const std::uint64_t seed = need_seed(c, "train");
    const auto trace = io::parse_zpl_trace(a.input);
    forecast::TrainOptions opt;
    opt.split = parse_split(a.m.split);
    opt.seed = seed;
    opt.max_epochs = a.m.max_epochs;
    opt.patience = a.m.patience;
    opt.batch_size = a.m.batch;
    opt.horizon = a.m.horizon;
    const auto path = out_path(c, "model.json");
    if (a.m.trials > 0) {
        forecast::SearchOptions sopt;
        sopt.trials = a.m.trials;
        sopt.train = opt;
        const auto res = forecast::hyperparameter_search(trace, search_space(block), sopt);
        serialize::save_checkpoint(res.best, outs.add(path));
        write_json(outs, sibling(path, "_search.json"),
                   {{"best_trial", res.best_trial}, {"trials", serialize::to_json(res.log)}});
        return;
    }
    const auto model = forecast::train(trace, a.m.hp, opt);
    serialize::save_checkpoint(model, outs.add(path));
    std::cout << "epochs=" << model.meta.epochs_run << " best_epoch=" << model.meta.best_epoch
              << " best_val_rmse=" << io::format_double(model.meta.best_val_rmse) << "\n";
}

struct ForecastArgs {
    std::string input;
    std::string model;
    std::string baseline;
    std::size_t window = 32;
    std::size_t horizon = 8;
    bool adapt = false;
    std::optional<std::size_t> origin;
    std::string attention_out;
};

void do_forecast(const Common& c, const ForecastArgs& a, Outputs& outs) {
    require(a.model.empty() != a.baseline.empty(), ErrorCode::InvalidArgument,
            "exactly one of --model and --baseline is required");
    const auto trace = io::parse_zpl_trace(a.input);
    const std::size_t origin = a.origin.value_or(trace.size() - 1);
    require(origin < trace.size(), ErrorCode::OutOfRange, "--origin lies past the end of the trace");
    const auto history = trace.slice(0, origin + 1);

    forecast::ForecastResult r;
    if (!a.model.empty()) {
        const auto model = serialize::load_checkpoint(a.model);
        r = forecast::autoregressive_forecast(model, history, a.horizon, a.adapt);
    } else {
        const auto kind = forecast::parse_model_kind(a.baseline);
        r = forecast::baseline_forecast(kind, history, a.horizon, a.window);
    }
    std::vector<double> steps;
    for (std::size_t k = 1; k <= r.horizon; ++k) steps.push_back(static_cast<double>(k));
    write_csv(outs, out_path(c, "forecast.csv"), {"step", "t_s", "lambda_pred_nm"}, {steps, r.timestamps, r.predictions});
    if (!a.attention_out.empty()) write_json(outs, a.attention_out, serialize::to_json(r));
}

struct EvaluateArgs {
    std::string input;
    std::vector<std::string> schemes{"5:4:1", "6:3:1", "7:2:1", "8:1:1"};
    std::vector<std::string> models{"bi-attn-lstm", "linear", "poly5", "sine"};
    ModelArgs m;
    bool adapt = false;
};

void do_evaluate(const Common& c, const EvaluateArgs& a, Outputs& outs) {
    const std::uint64_t seed = need_seed(c, "evaluate");
    const auto trace = io::parse_zpl_trace(a.input);
    eval::BenchmarkOptions opt;
    opt.schemes.clear();
    for (const auto& s : a.schemes) opt.schemes.push_back(parse_split(s));
    opt.models.clear();
    for (const auto& m : a.models) opt.models.push_back(forecast::parse_model_kind(m));
    opt.seed = seed;
    opt.horizon = static_cast<std::size_t>(a.m.horizon);
    opt.hpo_trials = a.m.trials;
    opt.hp = a.m.hp;
    opt.max_epochs = a.m.max_epochs;
    opt.patience = a.m.patience;
    opt.adapt = a.adapt;
    const auto report = eval::partition_benchmark(trace, opt);

    const fs::path dir = c.out.empty() ? default_dir() / "eval" : fs::path(c.out);
    write_json(outs, dir / "report.json", serialize::to_json(report));

    std::ostringstream csv;
    csv << "model,scheme,rmse_norm,rmse_nm\n";
    for (const auto& cell : report.cells) {
        csv << forecast::to_string(cell.model) << ',' << cell.scheme.label() << ','
            << io::format_double(cell.rmse_norm) << ',' << io::format_double(cell.rmse_nm) << '\n';
    }
    io::write_text(outs.add(dir / "report.csv"), csv.str());

    std::ostringstream mm;
    mm << "step,actual_ghz,residual_ghz,factor\n";
    for (const auto& r : report.mismatch) {
        mm << r.step << ',' << io::format_double(r.actual_ghz) << ',' << io::format_double(r.residual_ghz) << ','
           << (r.capped ? std::string("inf") : io::format_double(r.factor)) << '\n';
    }
    io::write_text(outs.add(dir / "mismatch.csv"), mm.str());
}

struct ReportArgs {
    std::string input;
    std::string g2;
    std::string model;
    Window zpl{538.8, 540.3};
    Window ref{547.0, 547.9};
    std::size_t window = 100;
    std::size_t stride = 10;
    std::size_t bins = replica::kDefaultBins;
    std::size_t max_lag = 0;
    std::size_t horizon = 8;
};

double std_of(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

void do_report(const Common& c, const ReportArgs& a, Outputs& outs) {
    const auto series = io::parse_spectral_series(a.input);
    const auto ex = peakfit::extract_traces(series, {a.zpl.first, a.zpl.second}, {a.ref.first, a.ref.second});
    json j;
    j["frames"] = series.n_frames();
    j["frame_interval_s"] = series.frame_interval();
    j["bin_width_nm"] = series.mean_bin_width();
    j["traces"] = {{"zpl_std_nm", std_of(ex.zpl.values())},
                   {"reference_std_nm", std_of(ex.reference.values())},
                   {"zpl_failed", ex.zpl_failed},
                   {"reference_failed", ex.reference_failed},
                   {"t_s", ex.zpl.timestamps()},
                   {"zpl_nm", ex.zpl.values()},
                   {"reference_nm", ex.reference.values()}};

    if (series.n_frames() >= a.window) {
        replica::EvolutionOptions opt;
        opt.window_len = a.window;
        opt.stride = a.stride;
        opt.bins = a.bins;
        j["overlap"] = serialize::to_json(replica::sliding_overlap_evolution(series, opt));
    }

    const auto r = noise::acf(ex.zpl, a.max_lag > 0 ? a.max_lag : default_max_lag(ex.zpl.size()));
    j["acf"] = {{"lag", r.lags}, {"r", r.r}, {"band", r.band}, {"first_band_crossing", noise::first_band_crossing(r)},
                {"decay_fit", decay_fit(r)}};
    const auto psd = noise::periodogram_psd(ex.zpl);
    j["psd"] = {{"freq_hz", psd.freqs},
                {"power", psd.power},
                {"segmented_fit", serialize::to_json(noise::fit_psd_segments(psd), psd)}};

    if (!a.g2.empty()) {
        const auto data = io::parse_g2(a.g2);
        j["g2"] = serialize::to_json(g2::fit_g2(data.delays, data.values));
    }
    if (!a.model.empty()) {
        const auto model = serialize::load_checkpoint(a.model);
        j["forecast"] = serialize::to_json(forecast::autoregressive_forecast(model, ex.zpl, a.horizon, true));
    }
    write_json(outs, out_path(c, "report.json"), j);
}

// ---------------------------------------------------------------------------

std::string option_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

std::vector<std::string> config_values(const json& v) {
    std::vector<std::string> out;
    auto scalar = [](const json& s) {
        if (s.is_string()) return s.get<std::string>();
        if (s.is_boolean()) return std::string(s.get<bool>() ? "true" : "false");
        if (s.is_number_integer() || s.is_number_unsigned()) return s.dump();
        if (s.is_number()) return io::format_double(s.get<double>());
        fail(ErrorCode::InvalidArgument, "unsupported config value " + s.dump());
    };
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(scalar(e));
    } else {
        out.push_back(scalar(v));
    }
    return out;
}

// Fills options that were not given on the command line from the JSON
// config: top-level keys first, then the block named after the subcommand.
// Object-valued keys inside the block are returned for module-specific use.
json apply_config(const std::string& path, CLI::App& app, CLI::App& sub) {
    json cfg;
    try {
        cfg = json::parse(io::read_text(path));
    } catch (const json::parse_error& e) {
        fail(ErrorCode::MalformedHeader, path + ": " + e.what());
    }
    require(cfg.is_object(), ErrorCode::InvalidArgument, path + ": config must be a JSON object");
    json block = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!it.value().is_object()) block[it.key()] = it.value();
    }
    if (cfg.contains(sub.get_name())) {
        for (auto it = cfg[sub.get_name()].begin(); it != cfg[sub.get_name()].end(); ++it) block[it.key()] = it.value();
    }
    json objects = json::object();
    for (auto it = block.begin(); it != block.end(); ++it) {
        if (it.value().is_object()) {
            objects[it.key()] = it.value();
            continue;
        }
        CLI::Option* opt = sub.get_option_no_throw(option_key(it.key()));
        if (opt == nullptr) opt = app.get_option_no_throw(option_key(it.key()));
        require(opt != nullptr, ErrorCode::InvalidArgument,
                path + ": unknown key '" + it.key() + "' for subcommand " + sub.get_name());
        if (opt->count() > 0) continue;
        for (const auto& v : config_values(it.value())) opt->add_result(v);
        opt->run_callback();
    }
    return objects;
}

}  // namespace

int run(std::span<const std::string> args) {
    CLI::App app{"Spectral diffusion analysis and forecasting toolkit", "specdiff"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    app.add_option("--seed", common.seed, "seed for stochastic subcommands");
    app.add_option("--config", common.config, "JSON config; command-line flags take precedence");
    app.add_option("-o,--out", common.out, std::string("output path (default directory: $") + kOutDirEnv + ")");

    SimulateArgs sim_a;
    auto* sim = app.add_subcommand("simulate", "fluctuator-bath trace and rendered spectra");
    sim->add_option("--preset", sim_a.preset)->capture_default_str()->check(CLI::IsMember(sim::preset_names()));
    sim->add_option("--frames", sim_a.frames, "override the preset frame count");
    sim->add_option("--kind", sim_a.kind, "spectra or trace")->capture_default_str();
    sim->add_option("--truth", sim_a.truth, "also write the injected ZPL trace here");

    ExtractArgs ex_a;
    auto* ext = app.add_subcommand("extract", "fit ZPL and reference peaks frame by frame");
    ext->add_option("-i,--input", ex_a.input)->required();
    ext->add_option("--zpl-window", ex_a.zpl, "lo hi (nm)")->capture_default_str();
    ext->add_option("--ref-window", ex_a.ref, "lo hi (nm)")->capture_default_str();
    ext->add_option("--ref-out", ex_a.ref_out, "reference trace path");

    OverlapArgs ov_a;
    auto* ov = app.add_subcommand("overlap", "replica overlap histograms");
    ov->add_option("-i,--input", ov_a.input)->required();
    ov->add_option("--window", ov_a.window)->capture_default_str();
    ov->add_option("--stride", ov_a.stride)->capture_default_str();
    ov->add_option("--bins", ov_a.bins)->capture_default_str();
    ov->add_option("--wl-window", ov_a.wl, "restrict to lo hi (nm)");
    ov->add_flag("--single", ov_a.single, "one histogram over the whole series");

    AcfArgs acf_a;
    auto* ac = app.add_subcommand("acf", "sample autocorrelation with 95% band");
    ac->add_option("-i,--input", acf_a.input)->required();
    ac->add_option("--max-lag", acf_a.max_lag, "default min(200, (N-1)/2)");
    ac->add_option("--fit", acf_a.fit, "power-law fit over lags first last (default: lags before the first band crossing)");

    PsdArgs psd_a;
    auto* ps = app.add_subcommand("psd", "periodogram and segmented power-law fit");
    ps->add_option("-i,--input", psd_a.input)->required();
    ps->add_flag("--detrend", psd_a.detrend);
    ps->add_option("--segments", psd_a.segments, "averaged blocks")->capture_default_str();
    ps->add_option("--change-points", psd_a.change_points)->capture_default_str();
    ps->add_option("--min-segment", psd_a.min_segment)->capture_default_str();
    ps->add_flag("--exact", psd_a.exact, "always use the maximum number of change points");
    ps->add_option("--band", psd_a.band, "fit band lo hi (Hz)");

    G2Args g2_a;
    auto* g2c = app.add_subcommand("g2fit", "antibunching fit");
    g2c->add_option("-i,--input", g2_a.input)->required();

    TrainArgs tr_a;
    auto* tr = app.add_subcommand("train", "train the attention Bi-LSTM forecaster");
    tr->add_option("-i,--input", tr_a.input)->required();
    tr->add_option("--split", tr_a.m.split)->capture_default_str();
    tr->add_option("--batch", tr_a.m.batch)->capture_default_str();
    add_model_options(tr, tr_a.m);

    ForecastArgs fc_a;
    auto* fc = app.add_subcommand("forecast", "autoregressive or baseline forecast");
    fc->add_option("-i,--input", fc_a.input)->required();
    fc->add_option("--model", fc_a.model, "trained checkpoint");
    fc->add_option("--baseline", fc_a.baseline, "linear, poly5 or sine");
    fc->add_option("--window", fc_a.window, "baseline fit window")->capture_default_str();
    fc->add_option("--horizon", fc_a.horizon)->capture_default_str();
    fc->add_flag("--adapt", fc_a.adapt, "volatility-adaptive input window");
    fc->add_option("--origin", fc_a.origin, "index of the last observed sample");
    fc->add_option("--attention-out", fc_a.attention_out, "JSON with per-step attention");

    EvaluateArgs ev_a;
    auto* ev = app.add_subcommand("evaluate", "partition benchmark and mismatch table");
    ev->add_option("-i,--input", ev_a.input)->required();
    ev->add_option("--schemes", ev_a.schemes)->capture_default_str();
    ev->add_option("--models", ev_a.models)->capture_default_str();
    ev->add_flag("--adapt", ev_a.adapt);
    add_model_options(ev, ev_a.m);

    ReportArgs rp_a;
    auto* rp = app.add_subcommand("report", "all analyses of one spectral series as one JSON");
    rp->add_option("-i,--input", rp_a.input)->required();
    rp->add_option("--g2", rp_a.g2, "g2 CSV");
    rp->add_option("--model", rp_a.model, "checkpoint for a forecast section");
    rp->add_option("--zpl-window", rp_a.zpl)->capture_default_str();
    rp->add_option("--ref-window", rp_a.ref)->capture_default_str();
    rp->add_option("--window", rp_a.window)->capture_default_str();
    rp->add_option("--stride", rp_a.stride)->capture_default_str();
    rp->add_option("--bins", rp_a.bins)->capture_default_str();
    rp->add_option("--max-lag", rp_a.max_lag);
    rp->add_option("--horizon", rp_a.horizon)->capture_default_str();

    std::vector<std::string> argv_store{"specdiff"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    Outputs outs;
    try {
        json block = json::object();
        if (!common.config.empty()) block = apply_config(common.config, app, *sub);
        const std::string name = sub->get_name();
        if (name == "simulate") do_simulate(common, sim_a, block, outs);
        else if (name == "extract") do_extract(common, ex_a, outs);
        else if (name == "overlap") do_overlap(common, ov_a, outs);
        else if (name == "acf") do_acf(common, acf_a, outs);
        else if (name == "psd") do_psd(common, psd_a, outs);
        else if (name == "g2fit") do_g2fit(common, g2_a, outs);
        else if (name == "train") do_train(common, tr_a, block, outs);
        else if (name == "forecast") do_forecast(common, fc_a, outs);
        else if (name == "evaluate") do_evaluate(common, ev_a, outs);
        else if (name == "report") do_report(common, rp_a, outs);
    } catch (const CLI::ParseError& e) {
        std::cerr << "specdiff " << sub->get_name() << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "specdiff " << sub->get_name() << ": " << e.what() << "\n";
        return kExitValidation;
    }
    outs.commit();
    return kExitOk;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace specdiff::cli
