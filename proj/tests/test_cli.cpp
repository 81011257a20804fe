#include "specdiff/cli.hpp"
#include "specdiff/io.hpp"

#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace specdiff;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<std::string> args) {
    const std::vector<std::string> v(args);
    return cli::run(v);
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

std::size_t data_rows(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') ++n;
    }
    return n - 1;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run({"frobnicate"}) == cli::kExitUsage);
    CHECK(run({}) == cli::kExitUsage);
    CHECK(run({"acf", "--bogus"}) == cli::kExitUsage);
    const std::string cmd = std::string(SPECDIFF_CLI) + " frobnicate > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == cli::kExitUsage);
}

TEST_CASE("stochastic subcommands need a seed") {
    testing::TempDir dir("cli-seed");
    CHECK(run({"simulate", "--kind", "trace", "--frames", "50", "-o", (dir / "t.csv").string()}) ==
          cli::kExitValidation);
    CHECK(!fs::exists(dir / "t.csv"));
}

TEST_CASE("simulate, extract, acf and psd chain deterministically") {
    testing::TempDir dir("cli-chain");
    auto chain = [&](const std::string& tag) {
        const auto s = (dir / ("s" + tag + ".csv")).string();
        const auto z = (dir / ("z" + tag + ".csv")).string();
        const auto a = (dir / ("a" + tag + ".csv")).string();
        const auto p = (dir / ("p" + tag + ".csv")).string();
        REQUIRE(run({"simulate", "--preset", "stable", "--seed", "7", "--frames", "190", "-o", s}) == 0);
        REQUIRE(run({"extract", "-i", s, "-o", z}) == 0);
        REQUIRE(run({"acf", "-i", z, "--fit", "1", "5", "-o", a}) == 0);
        REQUIRE(run({"psd", "-i", z, "-o", p}) == 0);
        return std::vector<std::string>{slurp(s), slurp(z), slurp(dir / ("z" + tag + "_ref.csv")), slurp(a),
                                        slurp(dir / ("a" + tag + "_fit.json")), slurp(p),
                                        slurp(dir / ("p" + tag + "_fit.json"))};
    };
    const auto first = chain("1");
    const auto second = chain("2");
    CHECK(first == second);
    CHECK(data_rows(dir / "z1.csv") == 190);
    CHECK(data_rows(dir / "a1.csv") == 95);

    REQUIRE(run({"overlap", "-i", (dir / "s1.csv").string(), "--window", "100", "--stride", "10", "-o",
                 (dir / "ov.csv").string()}) == 0);
    CHECK(data_rows(dir / "ov.csv") == 10);
    REQUIRE(run({"overlap", "-i", (dir / "s1.csv").string(), "--single", "-o", (dir / "ov.json").string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "ov.json"));
    CHECK(j["n_replicas"] == 190);

    REQUIRE(run({"report", "-i", (dir / "s1.csv").string(), "-o", (dir / "r.json").string()}) == 0);
    const auto r = nlohmann::json::parse(slurp(dir / "r.json"));
    CHECK(r["frames"] == 190);
    CHECK(r["overlap"]["counts"].size() == 10);
    CHECK(r.contains("acf"));
    CHECK(r.contains("psd"));
}

TEST_CASE("different seeds give different artifacts") {
    testing::TempDir dir("cli-seeds");
    REQUIRE(run({"simulate", "--kind", "trace", "--seed", "1", "--frames", "100", "-o", (dir / "a.csv").string()}) == 0);
    REQUIRE(run({"simulate", "--kind", "trace", "--seed", "2", "--frames", "100", "-o", (dir / "b.csv").string()}) == 0);
    CHECK(slurp(dir / "a.csv") != slurp(dir / "b.csv"));
}

TEST_CASE("baseline forecast spans 4 ms at 500 us sampling") {
    testing::TempDir dir("cli-fc");
    const auto t = (dir / "t.csv").string();
    REQUIRE(run({"simulate", "--kind", "trace", "--seed", "3", "--frames", "400", "-o", t}) == 0);
    REQUIRE(run({"forecast", "-i", t, "--baseline", "linear", "--origin", "299", "--horizon", "8", "-o",
                 (dir / "f.csv").string()}) == 0);
    CHECK(data_rows(dir / "f.csv") == 8);
    const auto text = slurp(dir / "f.csv");
    CHECK(text.rfind("step,t_s,lambda_pred_nm", 0) == 0);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    std::string last;
    while (std::getline(in, line)) last = line;
    const auto t8 = std::stod(last.substr(last.find(',') + 1));
    CHECK(t8 - 299 * 5e-4 == doctest::Approx(4e-3).epsilon(1e-9));
    CHECK(run({"forecast", "-i", t, "-o", (dir / "g.csv").string()}) == cli::kExitValidation);
    CHECK(run({"forecast", "-i", t, "--baseline", "linear", "--origin", "400"}) == cli::kExitValidation);
}

TEST_CASE("train, forecast with the checkpoint, evaluate") {
    testing::TempDir dir("cli-train");
    const auto t = (dir / "t.csv").string();
    io::write_zpl_trace(testing::sinusoid_ou_fixture(500, 1), t);
    const auto m = (dir / "m.json").string();
    const std::vector<std::string> train_args{"train", "-i", t, "--seed", "5", "--hidden", "4", "--seq-len", "8",
                                              "--max-epochs", "3", "-o", m};
    REQUIRE(cli::run(train_args) == 0);
    const auto first = slurp(m);
    REQUIRE(cli::run(train_args) == 0);
    CHECK(slurp(m) == first);
    CHECK(!fs::exists(dir / "m_search.json"));
    REQUIRE(run({"train", "-i", t, "--seed", "5", "--hidden", "4", "--seq-len", "8", "--max-epochs", "2", "--trials",
                 "2", "-o", (dir / "h.json").string()}) == 0);
    const auto log = nlohmann::json::parse(slurp(dir / "h_search.json"));
    CHECK(log.dump().find("trial") != std::string::npos);

    const auto att = (dir / "att.json").string();
    REQUIRE(run({"forecast", "-i", t, "--model", m, "--adapt", "--attention-out", att, "-o",
                 (dir / "f.csv").string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(att));
    CHECK(j["attention"].size() == 8);

    const auto ev = (dir / "eval").string();
    REQUIRE(run({"evaluate", "-i", t, "--seed", "1", "--models", "linear", "sine", "--schemes", "8:1:1", "-o", ev}) ==
            0);
    CHECK(fs::exists(dir / "eval" / "report.json"));
    CHECK(data_rows(dir / "eval" / "report.csv") == 2);
    CHECK(data_rows(dir / "eval" / "mismatch.csv") == 8);
    CHECK(run({"evaluate", "-i", t, "--seed", "1", "--schemes", "9:1:1", "-o", ev}) == cli::kExitValidation);
}

TEST_CASE("config file values yield to flags") {
    testing::TempDir dir("cli-config");
    const auto cfg = (dir / "c.json").string();
    io::write_text(cfg, R"({"seed": 4, "simulate": {"frames": 60, "kind": "trace", "bath": {"n_fluctuators": 5}}})");
    REQUIRE(run({"simulate", "--config", cfg, "-o", (dir / "a.csv").string()}) == 0);
    CHECK(data_rows(dir / "a.csv") == 60);
    REQUIRE(run({"simulate", "--config", cfg, "--frames", "70", "-o", (dir / "b.csv").string()}) == 0);
    CHECK(data_rows(dir / "b.csv") == 70);
    io::write_text(cfg, R"({"seed": 4, "simulate": {"colour": "red"}})");
    CHECK(run({"simulate", "--config", cfg, "-o", (dir / "c.csv").string()}) == cli::kExitValidation);
    CHECK(run({"simulate", "--config", (dir / "missing.json").string()}) == cli::kExitValidation);
}

TEST_CASE("failed runs remove partial outputs") {
    testing::TempDir dir("cli-partial");
    const auto t = (dir / "short.csv").string();
    io::write_zpl_trace(testing::sinusoid_ou_fixture(20, 1), t);
    CHECK(run({"psd", "-i", t, "-o", (dir / "p.csv").string()}) == cli::kExitValidation);
    CHECK(!fs::exists(dir / "p.csv"));
    CHECK(!fs::exists(dir / "p_fit.json"));
    CHECK(run({"acf", "-i", (dir / "absent.csv").string(), "-o", (dir / "a.csv").string()}) == cli::kExitValidation);
}

TEST_CASE("g2fit writes its summary") {
    testing::TempDir dir("cli-g2");
    io::G2Data d;
    for (int i = -50; i <= 50; ++i) {
        const double tau = i * 1e-9;
        d.delays.push_back(tau);
        d.values.push_back(1.0 - 0.8 * std::exp(-std::abs(tau) / 5e-9));
    }
    io::write_g2(d, dir / "g2.csv");
    REQUIRE(run({"g2fit", "-i", (dir / "g2.csv").string(), "-o", (dir / "g.json").string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "g.json"));
    CHECK(j["g2_0"].get<double>() == doctest::Approx(0.2).epsilon(1e-4));
    CHECK(j["single_photon"] == true);
}

TEST_CASE("output directory from the environment") {
    testing::TempDir dir("cli-env");
    ::setenv(cli::kOutDirEnv, dir.path().c_str(), 1);
    const int rc = run({"simulate", "--kind", "trace", "--seed", "1", "--frames", "30"});
    ::unsetenv(cli::kOutDirEnv);
    CHECK(rc == 0);
    CHECK(fs::exists(dir / "trace.csv"));
}

TEST_CASE("acf fits the decay region by default") {
    testing::TempDir dir("cli-acf");
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.01);
    std::vector<double> v(4000);
    double x = 0.0;
    for (double& e : v) {
        e = 539.55 + x;
        x = 0.95 * x + g(rng);
    }
    io::write_zpl_trace(ZplTrace::uniform(0.0, 5e-4, v), dir / "t.csv");
    REQUIRE(run({"acf", "-i", (dir / "t.csv").string(), "-o", (dir / "a.csv").string()}) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "a_fit.json"));
    const auto crossing = j["first_band_crossing"].get<std::size_t>();
    CHECK(crossing > 10);
    REQUIRE(j["fit"].is_object());
    CHECK(j["fit"]["fit_range"][1].get<std::size_t>() == crossing - 1);
    CHECK(j["fit"]["exponent"].get<double>() < 0.0);
}
