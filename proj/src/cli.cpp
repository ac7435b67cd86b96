#include "tacnog/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tacnog/dataset.hpp"
#include "tacnog/errors.hpp"
#include "tacnog/guidance_sim.hpp"
#include "tacnog/policy_net.hpp"
#include "tacnog/scenario_io.hpp"
#include "tacnog/shooting.hpp"

namespace tacnog {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t env_seed() {
    const char* s = std::getenv("TACNOG_SEED");
    if (s == nullptr || *s == '\0') return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (*end != '\0') throw UsageError("TACNOG_SEED must be a non-negative integer");
    return v;
}

void print_config(std::ostream& out, const std::string& cmd, json cfg) {
    cfg["command"] = cmd;
    out << "config: " << cfg.dump() << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    return f;
}

struct GenArgs {
    double p_max = 10.0;
    double step = 0.5;
    double horizon = 1.5;
    double h = kDefaultStep;
    std::string out;
    int workers = 0;
    bool serial = false;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    SweepConfig cfg;
    cfg.p_max = a.p_max;
    cfg.step_q = a.step;
    cfg.horizon = a.horizon;
    cfg.h = a.h;
    cfg.validate();
    print_config(out, "gen-dataset",
                 {{"pmax", a.p_max}, {"step", a.step}, {"horizon", a.horizon}, {"h", a.h}, {"out", a.out},
                  {"workers", a.workers}, {"serial", a.serial}, {"grid_size", cfg.grid_size()}});
    std::ofstream f = open_out(a.out);
    f << kDatasetHeader << '\n';
    auto sink = [&f](const DatasetRecord& r) { write_dataset_row(f, r); };
    const SweepStats st = a.serial ? generate_dataset_serial(cfg, sink) : generate_dataset(cfg, sink, a.workers);
    out << json{{"total", st.total},
                {"accepted", st.accepted},
                {"rejected_disconjugacy", st.rejected_disconjugacy},
                {"rejected_colinear", st.rejected_colinear},
                {"diverged", st.diverged}}
               .dump()
        << '\n';
    return 0;
}

struct TrainArgs {
    std::vector<std::string> data;
    std::string out;
    std::string curve;
    std::string optimizer = "sgd";
    std::string encoding = "cartesian";
    double horizon = 1.5;
    int candidates = 1;
    std::size_t validation_runs = 40;
    double hold_steps = SimOptions{}.hold_steps;
    TrainConfig cfg;
};

int cmd_train(TrainArgs a, std::uint64_t seed, std::ostream& out) {
    a.cfg.seed = seed;
    a.cfg.optimizer = a.optimizer == "adam" ? Optimizer::adam : Optimizer::sgd_momentum;
    a.cfg.encoding = parse_encoding(a.encoding);
    a.cfg.validate();
    print_config(out, "train",
                 {{"data", a.data},
                  {"out", a.out},
                  {"epochs", a.cfg.epochs},
                  {"batch", a.cfg.batch_size},
                  {"lr", a.cfg.learning_rate},
                  {"momentum", a.cfg.momentum},
                  {"optimizer", a.optimizer},
                  {"decay", a.cfg.lr_decay},
                  {"decay_every", a.cfg.decay_every},
                  {"val_frac", a.cfg.validation_fraction},
                  {"encoding", a.encoding},
                  {"min_range", a.cfg.min_range},
                  {"horizon", a.horizon},
                  {"candidates", a.candidates},
                  {"validation_runs", a.validation_runs},
                  {"hold_steps", a.hold_steps},
                  {"seed", seed}});
    std::vector<DatasetRecord> data;
    for (const auto& p : a.data) {
        auto d = read_dataset(p);
        data.insert(data.end(), d.begin(), d.end());
    }

    TrainResult res;
    json summary;
    if (a.candidates > 1) {
        SimOptions sim;
        sim.hold_steps = a.hold_steps;
        SelectionResult sel =
            train_with_closed_loop_selection(data, a.cfg, a.horizon, a.candidates, a.validation_runs, sim);
        json scores = json::array();
        for (const auto& s : sel.scores)
            scores.push_back({{"mean_angle_error_deg", s.mean_angle_error_deg},
                              {"max_angle_error_deg", s.max_angle_error_deg},
                              {"mean_miss", s.mean_miss},
                              {"aborted", s.aborted}});
        summary["closed_loop_scores"] = scores;
        summary["selected_seed"] = sel.best_seed;
        res = std::move(sel.best);
    } else {
        res = train(data, a.cfg, a.horizon);
    }
    save_weights(a.out, res.net);
    if (!a.curve.empty()) {
        std::ofstream f = open_out(a.curve);
        f << "epoch,train_loss,validation_rmse,best_rmse\n";
        for (std::size_t e = 0; e < res.train_loss.size(); ++e)
            f << e + 1 << ',' << res.train_loss[e] << ',' << res.validation_rmse[e] << ',' << res.best_rmse[e] << '\n';
    }
    summary["records"] = data.size();
    summary["train_size"] = res.train_size;
    summary["validation_size"] = res.validation_size;
    summary["best_validation_rmse"] = res.best_validation_rmse;
    summary["best_epoch"] = res.best_epoch;
    out << summary.dump() << '\n';
    return 0;
}

struct ShootArgs {
    std::string scenario;
    bool multistart = false;
    std::vector<double> guess{0.0, 0.0, 0.0};
    double q_range = MultistartOptions{}.q_range;
    double q_spacing = MultistartOptions{}.q_spacing;
    double h = kDefaultStep;
    int workers = 0;
    std::string out;
};

int cmd_shoot(const ShootArgs& a, std::ostream& out) {
    print_config(out, "shoot",
                 {{"scenario", a.scenario}, {"multistart", a.multistart}, {"guess", a.guess}, {"q_range", a.q_range},
                  {"q_spacing", a.q_spacing}, {"h", a.h}, {"workers", a.workers}, {"out", a.out}});
    const DimensionalScenario sc = load_scenario(a.scenario);
    const CanonicalScenario c = canonicalize(sc);
    ShootingProblem prob;
    prob.z0 = c.pursuer0;
    prob.horizon = c.horizon;
    prob.h = a.h;
    std::vector<ShootingResult> roots;
    if (a.multistart) {
        MultistartOptions mo;
        mo.q_range = a.q_range;
        mo.q_spacing = a.q_spacing;
        mo.workers = a.workers;
        roots = multistart(prob, mo);
    } else {
        prob.guess = {a.guess[0], a.guess[1], a.guess[2]};
        ShootingResult r = solve(prob);
        if (r.converged) roots.push_back(r);
    }
    json rj = roots_to_json(roots);
    for (auto& r : rj) r["effort_dimensional"] = sc.speed * sc.speed * r["effort"].get<double>();
    const json doc{{"canonical_horizon", c.horizon}, {"speed_mps", sc.speed}, {"roots", rj}};
    if (!a.out.empty()) open_out(a.out) << doc.dump(2) << '\n';
    out << doc.dump() << '\n';
    return roots.empty() ? 1 : 0;
}

struct SimArgs {
    std::string scenario;
    std::string model;
    bool oracle = false;
    std::string out;
    std::string trace;
    double dt = 0.0;
    double h = 0.0;
    double hold_steps = SimOptions{}.hold_steps;
};

int cmd_simulate(SimArgs a, std::ostream& out) {
    if (a.model.empty() == !a.oracle) throw UsageError("simulate needs exactly one of --model and --oracle");
    if (a.trace.empty()) {
        const auto dot = a.out.rfind('.');
        a.trace = (dot == std::string::npos ? a.out : a.out.substr(0, dot)) + ".csv";
    }
    print_config(out, "simulate",
                 {{"scenario", a.scenario}, {"model", a.model}, {"oracle", a.oracle}, {"out", a.out},
                  {"trace", a.trace}, {"dt", a.dt}, {"h", a.h}, {"hold_steps", a.hold_steps}});
    const DimensionalScenario sc = load_scenario(a.scenario);
    SimOptions opts;
    opts.dt = a.dt;
    opts.h = a.h;
    opts.hold_steps = a.hold_steps;
    Policy policy;
    if (a.oracle) {
        policy = shooting_oracle_policy(oracle_initial_guess(canonicalize(sc)));
    } else {
        policy = network_policy(load_weights(a.model));
    }
    const SimResult r = run_closed_loop(sc, policy, opts);
    const json summary = sim_summary_json(r, sc);
    open_out(a.out) << summary.dump(2) << '\n';
    std::ofstream t = open_out(a.trace);
    write_trace_csv(t, r);
    out << summary.dump() << '\n';
    return r.aborted ? 1 : 0;
}

struct ScalingArgs {
    int samples = 100;
    std::vector<double> lambdas{0.25, 0.5, 2.0, 4.0};
    double p_max = 10.0;
    double horizon = 1.5;
    double h = kDefaultStep;
    double tol = 1e-8;
};

int cmd_scaling(const ScalingArgs& a, std::uint64_t seed, std::ostream& out) {
    print_config(out, "eval-scaling",
                 {{"samples", a.samples}, {"lambdas", a.lambdas}, {"pmax", a.p_max}, {"horizon", a.horizon},
                  {"h", a.h}, {"tol", a.tol}, {"seed", seed}});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-a.p_max, a.p_max);
    std::vector<double> worst(a.lambdas.size(), 0.0);
    int accepted = 0;
    int drawn = 0;
    while (accepted < a.samples) {
        if (++drawn > 1000 * std::max(a.samples, 1)) throw Error("too few accepted draws");
        const CostateParams q{dist(rng), dist(rng), dist(rng)};
        if (!propagate_extremal(q, a.horizon, a.h).verdicts.optimal()) continue;
        ++accepted;
        for (std::size_t k = 0; k < a.lambdas.size(); ++k)
            worst[k] = std::max(worst[k], scaling_mismatch(q, a.horizon, a.lambdas[k], a.h));
    }
    json per = json::array();
    double overall = 0.0;
    for (std::size_t k = 0; k < a.lambdas.size(); ++k) {
        per.push_back({{"lambda", a.lambdas[k]}, {"max_mismatch", worst[k]}});
        overall = std::max(overall, worst[k]);
    }
    const bool pass = overall <= a.tol;
    out << json{{"samples", accepted}, {"draws", drawn}, {"per_lambda", per}, {"max_mismatch", overall}, {"pass", pass}}
               .dump()
        << '\n';
    return pass ? 0 : 1;
}

struct ReplayArgs {
    std::string data;
    double horizon = 1.5;
    double h = kDefaultStep;
    double tol = 1e-10;
    int refine = 0;
    int workers = 0;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
    print_config(out, "replay",
                 {{"data", a.data}, {"horizon", a.horizon}, {"h", a.h}, {"tol", a.tol}, {"refine", a.refine},
                  {"workers", a.workers}});
    SweepConfig cfg;
    cfg.horizon = a.horizon;
    cfg.h = a.h;
    const ReplayReport rep = replay_dataset(read_dataset(a.data), cfg, a.tol, a.refine, a.workers);
    out << json{{"checked", rep.checked},
                {"mismatched", rep.mismatched},
                {"refined_failures", rep.refined_failures},
                {"diverged", rep.diverged},
                {"max_state_error", rep.max_state_error},
                {"max_control_error", rep.max_control_error},
                {"clean", rep.clean()}}
               .dump()
        << '\n';
    return rep.clean() ? 0 : 1;
}

struct BenchArgs {
    std::string model;
    int iters = 100000;
    double budget_us = 1000.0;
};

int cmd_bench(const BenchArgs& a, std::uint64_t seed, std::ostream& out) {
    print_config(out, "bench-infer",
                 {{"model", a.model}, {"iters", a.iters}, {"budget_us", a.budget_us}, {"seed", seed}});
    if (a.iters < 1) throw UsageError("--iters must be positive");
    const PolicyNetwork net = a.model.empty() ? PolicyNetwork::random(1.5, seed) : load_weights(a.model);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-1.5, 1.5);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::vector<ExtremalState> inputs(1024);
    for (auto& z : inputs) z = {pos(rng), pos(rng), ang(rng)};
    double sink = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < a.iters; ++i) sink += net_forward(net, inputs[static_cast<std::size_t>(i) & 1023]);
    const double us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() / a.iters;
    const bool pass = us <= a.budget_us && std::isfinite(sink);
    out << json{{"mean_us", us}, {"iters", a.iters}, {"pass", pass}}.dump() << '\n';
    return pass ? 0 : 1;
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time- and angle-constrained optimal guidance toolkit"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Seed for every random draw (overrides TACNOG_SEED)");

    GenArgs gen;
    auto* g = app.add_subcommand("gen-dataset", "Sweep the costate grid and write the filtered dataset");
    g->add_option("--pmax", gen.p_max, "Grid half-width")->capture_default_str();
    g->add_option("--step", gen.step, "Grid spacing")->capture_default_str();
    g->add_option("--horizon", gen.horizon, "Reference horizon T")->capture_default_str();
    g->add_option("--h", gen.h, "RK4 step")->capture_default_str();
    g->add_option("--out", gen.out, "Output CSV")->required();
    g->add_option("--workers", gen.workers, "OpenMP threads (0: default)")->capture_default_str();
    g->add_flag("--serial", gen.serial, "Use the single-threaded reference sweep");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Fit the policy network");
    t->add_option("--data", tr.data, "Dataset CSV (repeatable)")->required();
    t->add_option("--out", tr.out, "Weights JSON")->required();
    t->add_option("--curve", tr.curve, "Per-epoch learning curve CSV");
    t->add_option("--epochs", tr.cfg.epochs)->capture_default_str();
    t->add_option("--batch", tr.cfg.batch_size)->capture_default_str();
    t->add_option("--lr", tr.cfg.learning_rate)->capture_default_str();
    t->add_option("--momentum", tr.cfg.momentum)->capture_default_str();
    t->add_option("--optimizer", tr.optimizer)->check(CLI::IsMember({"sgd", "adam"}))->capture_default_str();
    t->add_option("--decay", tr.cfg.lr_decay, "Learning-rate multiplier per decay period")->capture_default_str();
    t->add_option("--decay-every", tr.cfg.decay_every)->capture_default_str();
    t->add_option("--val-frac", tr.cfg.validation_fraction)->capture_default_str();
    t->add_option("--encoding", tr.encoding)->check(CLI::IsMember({"cartesian", "reach_polar"}))->capture_default_str();
    t->add_option("--min-range", tr.cfg.min_range, "Drop records closer than this to the target")
        ->capture_default_str();
    t->add_option("--horizon", tr.horizon)->capture_default_str();
    t->add_option("--candidates", tr.candidates, "Seeds to train; best closed-loop score wins")
        ->capture_default_str();
    t->add_option("--validation-runs", tr.validation_runs)->capture_default_str();
    t->add_option("--hold-steps", tr.hold_steps, "Terminal hold used when scoring candidates")
        ->capture_default_str();

    ShootArgs sh;
    auto* s = app.add_subcommand("shoot", "Solve the boundary-value problem for a scenario");
    s->add_option("--scenario", sh.scenario)->required();
    s->add_flag("--multistart", sh.multistart, "Solve from a grid of starts and list distinct roots");
    s->add_option("--guess", sh.guess, "Initial q for a single solve")->expected(3);
    s->add_option("--q-range", sh.q_range)->capture_default_str();
    s->add_option("--q-spacing", sh.q_spacing)->capture_default_str();
    s->add_option("--h", sh.h)->capture_default_str();
    s->add_option("--workers", sh.workers)->capture_default_str();
    s->add_option("--out", sh.out, "Roots JSON");

    SimArgs si;
    auto* m = app.add_subcommand("simulate", "Fly a scenario in closed loop");
    m->add_option("--scenario", si.scenario)->required();
    m->add_option("--model", si.model, "Weights JSON");
    m->add_flag("--oracle", si.oracle, "Use the re-solved shooting law instead of a network");
    m->add_option("--out", si.out, "Summary JSON")->required();
    m->add_option("--trace", si.trace, "Trace CSV (default: --out with a .csv extension)");
    m->add_option("--dt", si.dt, "Guidance step (0: t_f / 100)")->capture_default_str();
    m->add_option("--h", si.h, "Plant step (0: dt / 10)")->capture_default_str();
    m->add_option("--hold-steps", si.hold_steps)->capture_default_str();

    ScalingArgs sa;
    auto* e = app.add_subcommand("eval-scaling", "Check time-to-go scaling covariance on random accepted q");
    e->add_option("--samples", sa.samples)->capture_default_str();
    e->add_option("--lambdas", sa.lambdas)->capture_default_str();
    e->add_option("--pmax", sa.p_max)->capture_default_str();
    e->add_option("--horizon", sa.horizon)->capture_default_str();
    e->add_option("--h", sa.h)->capture_default_str();
    e->add_option("--tol", sa.tol)->capture_default_str();

    ReplayArgs ra;
    auto* r = app.add_subcommand("replay", "Re-propagate every record of a dataset");
    r->add_option("--data", ra.data)->required();
    r->add_option("--horizon", ra.horizon)->capture_default_str();
    r->add_option("--h", ra.h)->capture_default_str();
    r->add_option("--tol", ra.tol)->capture_default_str();
    r->add_option("--refine", ra.refine, "Also re-check disconjugacy at h / refine")->capture_default_str();
    r->add_option("--workers", ra.workers)->capture_default_str();

    BenchArgs ba;
    auto* b = app.add_subcommand("bench-infer", "Network inference latency smoke test");
    b->add_option("--model", ba.model, "Weights JSON (default: random network)");
    b->add_option("--iters", ba.iters)->capture_default_str();
    b->add_option("--budget-us", ba.budget_us)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (seed_opt->count() == 0) seed = env_seed();
        if (*g) return cmd_gen(gen, out);
        if (*t) return cmd_train(tr, seed, out);
        if (*s) return cmd_shoot(sh, out);
        if (*m) return cmd_simulate(si, out);
        if (*e) return cmd_scaling(sa, seed, out);
        if (*r) return cmd_replay(ra, out);
        if (*b) return cmd_bench(ba, seed, out);
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return 2;
    } catch (const ConfigError& ex) {
        err << "usage error: " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace tacnog
