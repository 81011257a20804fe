// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "specdiff/cli.hpp"
#include "specdiff/error.hpp"
#include "specdiff/eval.hpp"
#include "specdiff/forecaster.hpp"
#include "specdiff/g2.hpp"
#include "specdiff/io.hpp"
#include "specdiff/noise.hpp"
#include "specdiff/peakfit.hpp"
#include "specdiff/replica.hpp"
#include "specdiff/seeding.hpp"
#include "specdiff/simulator.hpp"

#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace specdiff;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Collects sub-checks; the first failure message is kept for the report.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failure_.empty()) failure_ = what;
        ok_ = ok_ && ok;
    }
    Outcome outcome(const std::string& summary) const { return {ok_, ok_ ? summary : failure_ + " (" + summary + ")"}; }

private:
    bool ok_ = true;
    std::string failure_;
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------

Outcome ghz_arithmetic() {
    Checks c;
    const double big = eval::shift_to_frequency(539.2619, 539.5476);
    const double step = eval::shift_to_frequency(550.0948, 550.0);
    const double resid = eval::shift_to_frequency(550.0, 549.9553);
    c.expect(std::abs(big - 294.0) <= 2.0, "294 GHz shift gave " + fmt(big));
    c.expect(std::abs(step - 94.0) <= 2.0, "94 GHz shift gave " + fmt(step));
    c.expect(std::abs(resid - 44.3) <= 2.0, "44.3 GHz residual gave " + fmt(resid));

    const std::vector<double> actual{550.0948, 550.0};
    const std::vector<double> predicted{549.9553};
    const auto rows = eval::mismatch_improvement(actual, predicted);
    const double f_unstable = rows.at(0).factor;
    const double f_stable = 98.1 / 6.18;
    c.expect(std::abs(f_unstable / 2.1 - 1.0) <= 0.05, "factor 2.1 gave " + fmt(f_unstable));
    c.expect(std::abs(f_stable / 15.8 - 1.0) <= 0.05, "factor 15.8 gave " + fmt(f_stable));
    return c.outcome(fmt(big) + " / " + fmt(step) + " / " + fmt(resid) + " GHz, factors " + fmt(f_unstable, 3) +
                     "x and " + fmt(f_stable, 3) + "x");
}

Outcome replica_overlap() {
    Checks c;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> n_dist(2, 40);
    std::uniform_int_distribution<int> bins_dist(4, 64);
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t pair_count = 0;
    for (int w = 0; w < 1000; ++w) {
        const int n = n_dist(rng);
        const int bins = bins_dist(rng);
        RowMatrix frames(n, bins);
        for (int i = 0; i < n; ++i)
            for (int b = 0; b < bins; ++b) frames(i, b) = 100.0 + 10.0 * g(rng);
        const auto m = replica::overlap_matrix(frames);
        const auto mean = replica::mean_trajectory(frames);
        double dev_sum = 0.0;
        for (int b = 0; b < bins; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += frames(i, b) - mean[b];
            dev_sum = std::max(dev_sum, std::abs(s));
        }
        c.expect(dev_sum < 1e-9, "deviations do not sum to zero");
        for (int a = 0; a < n; ++a) {
            c.expect(std::abs(m.q(a, a) - 1.0) < 1e-12, "diagonal differs from 1");
            for (int b = 0; b < n; ++b) {
                c.expect(m.q(a, b) == m.q(b, a), "matrix not symmetric");
                c.expect(std::abs(m.q(a, b)) <= 1.0 + 1e-12, "|q| exceeds 1");
            }
        }
        if (n == 2) c.expect(std::abs(m.q(0, 1) + 1.0) < 1e-12, "two replicas did not give q = -1");
        pair_count += static_cast<std::size_t>(n * (n - 1) / 2);
    }

    auto p = sim::preset("stable");
    p.bath.n_frames = 190;
    const auto trace = sim::simulate_fluctuator_bath(p.bath, 3);
    const auto series = sim::synthesize_spectra(trace, p.render, 4);
    const auto evo = replica::sliding_overlap_evolution(series, {100, 10, replica::kDefaultBins, {}});
    c.expect(evo.histograms.size() == 10, "190 frames gave " + std::to_string(evo.histograms.size()) + " windows");
    return c.outcome("1000 windows, " + std::to_string(pair_count) + " pairs; 190 frames -> " +
                     std::to_string(evo.histograms.size()) + " windows");
}

Outcome acf_band_coverage() {
    Checks c;
    std::size_t inside = 0;
    std::size_t total = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(derive_seed(seed, 3));
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> v(10000);
        for (double& x : v) x = g(rng);
        const auto r = noise::acf(v, 100);
        for (std::size_t k = 1; k <= 100; ++k) {
            inside += std::abs(r.r[k]) <= r.band[k];
            ++total;
        }
    }
    const double coverage = static_cast<double>(inside) / static_cast<double>(total);
    c.expect(coverage >= 0.9, "coverage " + fmt(coverage));

    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(derive_seed(seed, 4));
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> v(200000);
        double x = g(rng) / std::sqrt(1.0 - 0.81);
        for (double& e : v) {
            e = x;
            x = 0.9 * x + g(rng);
        }
        const auto r = noise::acf(v, 20);
        for (std::size_t k = 1; k <= 20; ++k) worst = std::max(worst, std::abs(r.r[k] - std::pow(0.9, k)));
    }
    c.expect(worst < 0.03, "AR(1) error " + fmt(worst));
    return c.outcome("band coverage " + fmt(100 * coverage, 4) + "%, AR(1) max error " + fmt(worst, 3) + " over 5 traces of 200000");
}

Outcome psd_fidelity() {
    Checks c;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 0.02);
        std::vector<double> v(256 + seed * 17);
        for (double& x : v) x = 539.55 + g(rng);
        const auto psd = noise::periodogram_psd(v, 2000.0);
        const double df = psd.freqs[1];
        double total = 0.0;
        for (double p : psd.power) total += p * df;
        const double sd = testing::std_of(v);
        worst = std::max(worst, std::abs(total / (sd * sd) - 1.0));
    }
    c.expect(worst <= 1e-6, "Parseval error " + fmt(worst));

    std::vector<double> s(2000);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(2.0 * std::numbers::pi * 100.0 * double(i) / 2000.0);
    const auto ps = noise::periodogram_psd(s, 2000.0);
    const auto peak = static_cast<std::size_t>(std::max_element(ps.power.begin(), ps.power.end()) - ps.power.begin());
    c.expect(ps.freqs[peak] == 100.0, "sinusoid peak at " + fmt(ps.freqs[peak]) + " Hz");

    // Ensemble-averaged periodogram of the bath preset, fitted below 10 Hz.
    const auto bath = sim::preset("bath");
    std::vector<double> avg;
    std::vector<double> freqs;
    const int members = 20;
    for (int m = 0; m < members; ++m) {
        const auto psd = noise::periodogram_psd(sim::simulate_fluctuator_bath(bath.bath, derive_seed(11, m)));
        if (avg.empty()) {
            avg.assign(psd.power.size(), 0.0);
            freqs = psd.freqs;
        }
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += psd.power[i] / members;
    }
    std::vector<double> f;
    std::vector<double> p;
    for (std::size_t i = 1; i < freqs.size() && freqs[i] <= 10.0; ++i) {
        f.push_back(freqs[i]);
        p.push_back(avg[i]);
    }
    const double alpha = -noise::fit_log_log(f, p).exponent;
    c.expect(alpha >= 0.8 && alpha <= 1.2, "bath alpha " + fmt(alpha));

    const auto stable = sim::preset("stable");
    const auto psd = noise::periodogram_psd(sim::simulate_fluctuator_bath(stable.bath, 1));
    const auto seg = noise::fit_psd_segments(psd);
    const double a_low = -seg.segments.front().fit.exponent;
    const double a_high = -seg.segments.back().fit.exponent;
    c.expect(seg.segments.size() >= 2, "stable preset gave a single segment");
    c.expect(std::abs(a_high) < std::abs(a_low), "no flattening: " + fmt(a_low) + " -> " + fmt(a_high));
    return c.outcome("Parseval " + fmt(worst, 2) + ", peak " + fmt(ps.freqs[peak]) + " Hz, bath alpha " + fmt(alpha, 3) +
                     ", stable alpha " + fmt(a_low, 3) + " -> " + fmt(a_high, 3));
}

Outcome change_points() {
    Checks c;
    noise::PsdResult psd;
    psd.fs = 200.0;
    for (int k = 0; k <= 400; ++k) {
        const double fk = 0.25 * k;
        psd.freqs.push_back(fk);
        psd.power.push_back(k == 0 ? 1.0 : (fk < 10.0 ? 10.0 / fk : 1.0));
    }
    const auto fit = noise::fit_psd_segments(psd);
    c.expect(!fit.change_points.empty() && fit.change_points.size() <= 2, "wrong change-point count");
    long knee = fit.change_points.empty() ? -1 : static_cast<long>(fit.change_points.front());
    c.expect(std::abs(knee - 40) <= 2, "knee at bin " + std::to_string(knee));
    const double s_low = fit.segments.front().fit.exponent;
    const double s_high = fit.segments.back().fit.exponent;
    c.expect(std::abs(s_low + 1.0) <= 0.1, "low slope " + fmt(s_low));
    c.expect(std::abs(s_high) <= 0.1, "high slope " + fmt(s_high));

    noise::SegmentOptions too_many;
    too_many.max_change_points = 3;
    bool rejected = false;
    try {
        noise::fit_psd_segments(psd, too_many);
    } catch (const Error&) {
        rejected = true;
    }
    c.expect(rejected, "three change points accepted");
    return c.outcome("knee bin " + std::to_string(knee) + " (true 40), slopes " + fmt(s_low, 3) + " / " +
                     fmt(s_high, 3) + ", limit 2 enforced");
}

Outcome forecaster_correctness() {
    Checks c;
    double worst_grad = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        forecast::Hyperparams hp;
        hp.hidden_size = 4;
        hp.sequence_length = 5;
        hp.num_layers = 1 + static_cast<int>(seed % 2);
        worst_grad = std::max(worst_grad, forecast::gradient_check(hp, seed, 80).max_relative_error);
    }
    c.expect(worst_grad < 1e-4, "gradient error " + fmt(worst_grad));

    forecast::Hyperparams hp;
    hp.hidden_size = 6;
    hp.sequence_length = 8;
    hp.learning_rate = 5e-3;
    forecast::TrainOptions opt;
    opt.seed = 3;
    opt.max_epochs = 20;
    opt.patience = 5;
    const auto trace = testing::sinusoid_ou_fixture(600, 5);
    const auto model = forecast::train(trace, hp, opt);

    const auto net = model.network();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    double simplex_err = 0.0;
    bool negative = false;
    forecast::ForwardCache cache;
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> w(2 + static_cast<std::size_t>(i % 7));
        for (double& x : w) x = 3.0 * g(rng);
        net.forward(model.parameters, w, cache, i % 2 ? &rng : nullptr);
        simplex_err = std::max(simplex_err, std::abs(cache.alpha.sum() - 1.0));
        negative = negative || cache.alpha.minCoeff() < 0.0;
    }
    const auto f = forecast::autoregressive_forecast(model, trace.slice(0, 500), 8, true);
    for (const auto& a : f.attention_maps) {
        double s = 0.0;
        for (double x : a) {
            s += x;
            negative = negative || x < 0.0;
        }
        simplex_err = std::max(simplex_err, std::abs(s - 1.0));
    }
    c.expect(simplex_err < 1e-12 && !negative, "attention off the simplex by " + fmt(simplex_err));

    std::vector<double> moved(trace.values().begin(), trace.values().end());
    const double offset = 2.5;
    for (double& x : moved) x += offset;
    const auto shifted = ZplTrace::uniform(0.0, trace.step(), moved);
    const auto model2 = forecast::train(shifted, hp, opt);
    const auto f1 = forecast::autoregressive_forecast(model, trace.slice(0, 500), 8);
    const auto f2 = forecast::autoregressive_forecast(model2, shifted.slice(0, 500), 8);
    double shift_err = 0.0;
    for (std::size_t k = 0; k < 8; ++k) shift_err = std::max(shift_err, std::abs(f2.predictions[k] - f1.predictions[k] - offset));
    c.expect(shift_err < 1e-8, "shift error " + fmt(shift_err) + " nm");

    double round_trip = 0.0;
    for (double x : trace.values()) {
        round_trip = std::max(round_trip, std::abs(model.norm.denormalize(model.norm.normalize(x)) - x) / std::abs(x));
    }
    c.expect(round_trip <= 1e-10, "round trip " + fmt(round_trip));
    return c.outcome("grad rel err " + fmt(worst_grad, 2) + ", simplex err " + fmt(simplex_err, 2) + ", shift err " +
                     fmt(shift_err, 2) + " nm, round trip " + fmt(round_trip, 2));
}

Outcome forecaster_skill() {
    Checks c;
    const auto trace = testing::sinusoid_ou_fixture();
    eval::BenchmarkOptions opt;
    opt.models = {forecast::ModelKind::BiAttnLstm, forecast::ModelKind::Linear};
    opt.seed = 1;
    opt.hp.hidden_size = 16;
    opt.hp.sequence_length = 16;
    opt.hp.learning_rate = 1e-3;
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = eval::partition_benchmark(trace, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int wins = 0;
    std::vector<double> lstm;
    std::string table;
    for (std::size_t s = 0; s < opt.schemes.size(); ++s) {
        const auto& net = report.cells[2 * s];
        const auto& lin = report.cells[2 * s + 1];
        wins += net.rmse_nm <= lin.rmse_nm;
        lstm.push_back(net.rmse_norm);
        table += " " + net.scheme.label() + "=" + fmt(net.rmse_norm, 3) + "/" + fmt(lin.rmse_norm, 3);
    }
    const double mean = testing::mean_of(lstm);
    const double spread = (*std::max_element(lstm.begin(), lstm.end()) - *std::min_element(lstm.begin(), lstm.end())) / mean;
    c.expect(wins >= 3, "network beat linear in " + std::to_string(wins) + " of 4 schemes");
    c.expect(spread < 0.25, "spread " + fmt(spread));
    return c.outcome("wins " + std::to_string(wins) + "/4, spread " + fmt(100 * spread, 3) + "%, lstm/linear" + table +
                     ", " + fmt(secs, 3) + " s");
}

Outcome pipeline_round_trip() {
    Checks c;
    double worst_rms = 0.0;
    double worst_ref = 0.0;
    double worst_ratio = 1e300;
    for (const auto& name : sim::preset_names()) {
        auto p = sim::preset(name);
        p.bath.n_frames = 2000;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            const auto truth = sim::simulate_fluctuator_bath(p.bath, seed);
            const auto series = sim::synthesize_spectra(truth, p.render, derive_seed(seed, 0x5bec7a));
            const auto ex = peakfit::extract_traces(series, {538.8, 540.3}, {547.0, 547.9});
            const double bin = p.render.bin_width();
            double ss = 0.0;
            for (std::size_t i = 0; i < truth.size(); ++i) {
                const double d = ex.zpl.values()[i] - truth.values()[i];
                ss += d * d;
            }
            const double rms = std::sqrt(ss / static_cast<double>(truth.size())) / bin;
            const double ref = testing::std_of(ex.reference.values()) / bin;
            const double ratio = testing::std_of(ex.zpl.values()) / (ref * bin);
            worst_rms = std::max(worst_rms, rms);
            worst_ref = std::max(worst_ref, ref);
            worst_ratio = std::min(worst_ratio, ratio);
            c.expect(rms <= 0.2, name + " seed " + std::to_string(seed) + " rms " + fmt(rms) + " bins");
            c.expect(ref < 0.05, name + " seed " + std::to_string(seed) + " reference std " + fmt(ref) + " bins");
            c.expect(ratio >= 10.0, name + " seed " + std::to_string(seed) + " contrast " + fmt(ratio));
        }
    }
    return c.outcome("worst rms " + fmt(worst_rms, 3) + " bin, reference std " + fmt(worst_ref, 3) +
                     " bin, min contrast " + fmt(worst_ratio, 3) + "x");
}

Outcome g2_fit() {
    Checks c;
    std::vector<double> t;
    for (int i = -100; i <= 100; ++i) t.push_back(i * 0.5e-9);
    double worst_exact = 0.0;
    for (double g0 : {0.05, 0.2, 0.45}) {
        for (double tau : {2e-9, 5e-9, 12e-9}) {
            std::vector<double> y;
            for (double x : t) y.push_back(g2::antibunching(x, g0, tau));
            const auto fit = g2::fit_g2(t, y);
            worst_exact = std::max({worst_exact, std::abs(fit.g2_0 / g0 - 1.0), std::abs(fit.tau_antibunch / tau - 1.0)});
        }
    }
    c.expect(worst_exact <= 1e-6, "exact recovery error " + fmt(worst_exact));

    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 0.02);
    std::vector<double> y;
    for (double x : t) y.push_back(g2::antibunching(x, 0.2, 5e-9) + g(rng));
    const auto noisy = g2::fit_g2(t, y);
    const double err_g0 = std::abs(noisy.g2_0 / 0.2 - 1.0);
    const double err_tau = std::abs(noisy.tau_antibunch / 5e-9 - 1.0);
    c.expect(err_g0 <= 0.05 && err_tau <= 0.05, "noisy recovery " + fmt(err_g0) + " / " + fmt(err_tau));

    double identity = 0.0;
    for (double g0 : {0.0, 0.3, 0.9}) identity = std::max(identity, std::abs(g2::antibunching(0.0, g0, 3e-9) - g0));
    c.expect(identity < 1e-15, "g2(0) identity off by " + fmt(identity));
    return c.outcome("exact err " + fmt(worst_exact, 2) + ", noisy err " + fmt(100 * err_g0, 3) + "% / " +
                     fmt(100 * err_tau, 3) + "%");
}

int cli(const std::vector<std::string>& args) { return cli::run(args); }

Outcome determinism() {
    Checks c;
    testing::TempDir dir("acceptance");
    const fs::path golden = SPECDIFF_GOLDEN_DIR;
    std::size_t compared = 0;
    for (const auto& name : sim::preset_names()) {
        for (const std::string kind : {"trace", "spectra"}) {
            const std::string file = name + "_" + kind + ".csv";
            const std::vector<std::string> args{"simulate", "--preset", name, "--seed", "7", "--frames", "40",
                                                "--kind", kind, "-o", (dir / file).string()};
            c.expect(cli(args) == 0, "simulate " + file + " failed");
            const auto first = io::read_text(dir / file);
            c.expect(cli(args) == 0, "rerun of " + file + " failed");
            c.expect(io::read_text(dir / file) == first, file + " differs across reruns");
            c.expect(fs::exists(golden / file) && io::read_text(golden / file) == first, file + " differs from golden");
            ++compared;
        }
    }

    const auto trace = (dir / "fixture.csv").string();
    io::write_zpl_trace(testing::sinusoid_ou_fixture(400, 2), trace);
    const std::vector<std::vector<std::string>> runs{
        {"train", "-i", trace, "--seed", "9", "--hidden", "4", "--seq-len", "8", "--max-epochs", "4", "--trials", "2",
         "-o", (dir / "m.json").string()},
        {"evaluate", "-i", trace, "--seed", "9", "--hidden", "4", "--seq-len", "8", "--max-epochs", "3", "--schemes",
         "8:1:1", "-o", (dir / "eval").string()},
        {"forecast", "-i", trace, "--model", (dir / "m.json").string(), "--adapt", "-o", (dir / "f.csv").string()},
    };
    const std::vector<std::vector<fs::path>> products{
        {dir / "m.json", dir / "m_search.json"},
        {dir / "eval" / "report.json", dir / "eval" / "report.csv", dir / "eval" / "mismatch.csv"},
        {dir / "f.csv"},
    };
    for (std::size_t r = 0; r < runs.size(); ++r) {
        c.expect(cli(runs[r]) == 0, runs[r][0] + " failed");
        std::vector<std::string> first;
        for (const auto& p : products[r]) first.push_back(io::read_text(p));
        c.expect(cli(runs[r]) == 0, runs[r][0] + " rerun failed");
        for (std::size_t k = 0; k < products[r].size(); ++k) {
            c.expect(io::read_text(products[r][k]) == first[k], products[r][k].filename().string() + " differs");
            ++compared;
        }
    }
    return c.outcome(std::to_string(compared) + " artifacts byte-identical, 6 golden files matched");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"GHz arithmetic", ghz_arithmetic},
        {"replica overlap", replica_overlap},
        {"ACF band coverage", acf_band_coverage},
        {"PSD fidelity", psd_fidelity},
        {"change-point segmentation", change_points},
        {"forecaster correctness", forecaster_correctness},
        {"forecaster skill", forecaster_skill},
        {"pipeline round trip", pipeline_round_trip},
        {"g2 fit", g2_fit},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "AC" << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
