#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacnog/cli.hpp"
#include "tacnog/dataset.hpp"
#include "tacnog/policy_net.hpp"
#include "tacnog/scenario_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "tacnog");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = tacnog::run_command(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json config_line(const std::string& out) {
    const auto pos = out.find("config: ");
    REQUIRE(pos != std::string::npos);
    const auto end = out.find('\n', pos);
    return nlohmann::json::parse(out.substr(pos + 8, end - pos - 8));
}

fs::path scratch() {
    const auto d = fs::temp_directory_path() / "tacnog_cli_test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    const auto x = (scratch() / "x.csv").string();
    fs::remove(x);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"gen-dataset"}).code == 2);                                   // --out missing
    CHECK(run({"gen-dataset", "--out", x, "--bogus"}).code == 2);      // unknown flag
    CHECK(run({"gen-dataset", "--out", x, "--step", "0"}).code == 2);  // invalid config
    CHECK(run({"train", "--data", x, "--out", x, "--optimizer", "lbfgs"}).code == 2);
    CHECK_FALSE(fs::exists(x));
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("gen-dataset writes the sweep and is byte-identical across runs and workers") {
    const auto dir = scratch();
    const auto a = dir / "a.csv", b = dir / "b.csv", c = dir / "c.csv";
    const auto r1 = run({"gen-dataset", "--pmax", "2", "--step", "0.5", "--out", a.string()});
    REQUIRE(r1.code == 0);
    const auto cfg = config_line(r1.out);
    CHECK(cfg["command"] == "gen-dataset");
    CHECK(cfg["pmax"] == 2.0);
    REQUIRE(run({"gen-dataset", "--pmax", "2", "--step", "0.5", "--workers", "3", "--out", b.string()}).code == 0);
    REQUIRE(run({"gen-dataset", "--pmax", "2", "--step", "0.5", "--serial", "--out", c.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) == slurp(c));
    tacnog::SweepConfig sc;
    sc.p_max = 2.0;
    CHECK(tacnog::read_dataset(a) == tacnog::generate_dataset(sc).records);
    CHECK(r1.out.find("\"accepted\"") != std::string::npos);
}

TEST_CASE("replay audits a dataset") {
    const auto dir = scratch();
    const auto a = dir / "replay.csv";
    REQUIRE(run({"gen-dataset", "--pmax", "1", "--step", "0.5", "--out", a.string()}).code == 0);
    CHECK(run({"replay", "--data", a.string(), "--refine", "10"}).code == 0);
    auto recs = tacnog::read_dataset(a);
    recs[0].control += 1e-3;
    tacnog::write_dataset(a, recs);
    CHECK(run({"replay", "--data", a.string()}).code == 1);
    CHECK(run({"replay", "--data", (dir / "missing.csv").string()}).code == 1);
}

TEST_CASE("train is seeded and deterministic") {
    const auto dir = scratch();
    const auto d = dir / "train.csv";
    REQUIRE(run({"gen-dataset", "--pmax", "3", "--step", "0.5", "--h", "0.01", "--out", d.string()}).code == 0);
    const auto w1 = dir / "w1.json", w2 = dir / "w2.json", w3 = dir / "w3.json", curve = dir / "curve.csv";
    const std::vector<std::string> base{"train", "--data", d.string(), "--epochs", "3", "--batch", "32"};
    auto args = base;
    args.insert(args.end(), {"--out", w1.string(), "--curve", curve.string()});
    const auto r = run(args);
    REQUIRE(r.code == 0);
    CHECK(config_line(r.out)["seed"] == 0);
    args = base;
    args.insert(args.end(), {"--out", w2.string()});
    REQUIRE(run(args).code == 0);
    CHECK(slurp(w1) == slurp(w2));
    CHECK(slurp(curve).find('\n') != std::string::npos);

    args = base;
    args.insert(args.begin(), {"--seed", "9"});
    args.insert(args.end(), {"--out", w3.string(), "--encoding", "reach_polar"});
    const auto r3 = run(args);
    REQUIRE(r3.code == 0);
    CHECK(config_line(r3.out)["seed"] == 9);
    CHECK(tacnog::load_weights(w3).encoding == tacnog::InputEncoding::reach_polar);

    setenv("TACNOG_SEED", "5", 1);
    args = base;
    args.insert(args.end(), {"--out", w3.string()});
    CHECK(config_line(run(args).out)["seed"] == 5);
    setenv("TACNOG_SEED", "abc", 1);
    CHECK(run(args).code == 2);
    unsetenv("TACNOG_SEED");
}

TEST_CASE("shoot and simulate on a straight-in scenario") {
    const auto dir = scratch();
    tacnog::DimensionalScenario sc;
    sc.pursuer0 = tacnog::EngagementState::make(0, 500, -tacnog::kPi / 2);
    sc.speed = 250;
    sc.impact_time = 2.0;
    const auto scen = dir / "straight.json";
    tacnog::save_scenario(scen, sc);

    const auto roots = dir / "roots.json";
    const auto r = run({"shoot", "--scenario", scen.string(), "--guess", "0", "0", "0", "--out", roots.string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(roots));
    CHECK(j["speed_mps"] == 250.0);
    REQUIRE(j["roots"].size() == 1);
    CHECK(j["roots"][0]["effort_dimensional"].get<double>() < 1e-12);

    const auto out = dir / "run.json";
    auto net = tacnog::PolicyNetwork::zeros(1.5);
    const auto model = dir / "zero.json";
    tacnog::save_weights(model, net);
    REQUIRE(run({"simulate", "--scenario", scen.string(), "--model", model.string(), "--out", out.string()}).code == 0);
    const auto s = nlohmann::json::parse(slurp(out));
    CHECK(s["miss_distance_m"].get<double>() < 1e-6);
    CHECK(s["control_effort"].get<double>() == 0.0);
    CHECK(slurp(dir / "run.csv").rfind("t,x,y,theta,u_cmd,u_app\n", 0) == 0);

    CHECK(run({"simulate", "--scenario", scen.string(), "--out", out.string()}).code == 2);
    CHECK(run({"simulate", "--scenario", scen.string(), "--model", model.string(), "--oracle", "--out",
               out.string()})
              .code == 2);
    CHECK(run({"simulate", "--scenario", (dir / "nope.json").string(), "--oracle", "--out", out.string()}).code == 1);
}

TEST_CASE("eval-scaling and bench-infer") {
    const auto r = run({"eval-scaling", "--samples", "5", "--pmax", "4"});
    CHECK(r.code == 0);
    CHECK(config_line(r.out)["command"] == "eval-scaling");
    CHECK(run({"eval-scaling", "--samples", "3", "--lambdas", "3", "--tol", "1e-30"}).code == 1);

    CHECK(run({"bench-infer", "--iters", "1000"}).code == 0);
    CHECK(run({"bench-infer", "--iters", "1000", "--budget-us", "1e-9"}).code == 1);
}
