#include "tacnog/guidance_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

#include "tacnog/errors.hpp"
#include "tacnog/rk4.hpp"
#include "tacnog/shooting.hpp"

namespace tacnog {

double control_effort(std::span<const TraceSample> trace) {
    double j = 0.0;
    for (std::size_t k = 1; k < trace.size(); ++k) {
        const double a = trace[k - 1].u_app;
        const double b = trace[k].u_app;
        j += 0.25 * (a * a + b * b) * (trace[k].t - trace[k - 1].t);
    }
    return j;
}

SimResult run_closed_loop(const DimensionalScenario& sc, const Policy& policy, const SimOptions& opts) {
    const CanonicalScenario canon = canonicalize(sc);
    const double t_f = sc.impact_time;
    const double dt_req = opts.dt > 0.0 ? opts.dt : 0.01 * t_f;
    const double h_req = opts.h > 0.0 ? opts.h : dt_req / 10.0;
    if (!(dt_req >= h_req && h_req > 0.0)) throw ConfigError("simulation requires dt >= h > 0");

    const std::size_t n_guid = step_count(t_f, dt_req);
    const double dt = t_f / static_cast<double>(n_guid);
    const std::size_t n_sub = step_count(dt, h_req);
    const double h = dt / static_cast<double>(n_sub);
    const double t_go_min = opts.hold_steps * dt;
    const double V = sc.speed;

    SimResult res;
    res.trace.reserve(n_guid * n_sub + 1);
    std::array<double, 3> s{sc.pursuer0.x, sc.pursuer0.y, sc.pursuer0.theta};
    double u_cmd = 0.0;
    double u_app = 0.0;
    std::size_t saturated = 0;
    std::size_t final_start = 0;

    auto plant = [&u_app, V](double, const std::array<double, 3>& x) {
        return std::array<double, 3>{V * std::cos(x[2]), V * std::sin(x[2]), u_app / V};
    };

    for (std::size_t k = 0; k < n_guid; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double t_go = t_f - t;
        if (k == 0 || t_go >= t_go_min - 1e-12 * t_f) {
            double u_c = 0.0;
            try {
                u_c = policy(t_go, canon.transform.to_canonical(EngagementState::make(s[0], s[1], s[2])));
            } catch (const std::exception& e) {
                res.aborted = true;
                res.abort_reason = e.what();
            }
            if (!res.aborted && !std::isfinite(u_c)) {
                res.aborted = true;
                res.abort_reason = "policy returned a non-finite command";
            }
            if (res.aborted) break;
            u_cmd = dimensionalize_control(u_c, V);
        }
        u_app = std::clamp(u_cmd, -sc.a_max, sc.a_max);
        if (std::abs(u_cmd) > sc.a_max) ++saturated;
        if (k + 1 == n_guid) final_start = res.trace.size();
        for (std::size_t j = 0; j < n_sub; ++j) {
            const double tj = t + static_cast<double>(j) * h;
            res.trace.push_back({tj, s[0], s[1], s[2], u_cmd, u_app});
            rk4_step(s, tj, h, plant);
        }
    }

    if (res.aborted) {
        res.trace.push_back({res.trace.empty() ? 0.0 : res.trace.back().t + h, s[0], s[1], s[2], u_cmd, u_app});
        res.effort = control_effort(res.trace);
        return res;
    }
    res.trace.push_back({t_f, s[0], s[1], s[2], u_cmd, u_app});

    double best = std::numeric_limits<double>::infinity();
    double t_best = t_f;
    for (std::size_t k = final_start; k < res.trace.size(); ++k) {
        const double d = std::hypot(res.trace[k].x - sc.target.x, res.trace[k].y - sc.target.y);
        if (d < best) {
            best = d;
            t_best = res.trace[k].t;
        }
    }
    res.miss_distance = best;
    res.impact_time_error = t_best - t_f;
    res.impact_angle_error = wrap_angle(s[2] - sc.impact_angle);
    res.effort = control_effort(res.trace);
    res.saturation_fraction = static_cast<double>(saturated) / static_cast<double>(n_guid);
    return res;
}

Policy network_policy(const PolicyNetwork& net) {
    return [net](double t_go, const EngagementState& z) { return feedback_control(net, t_go, z); };
}

Policy shooting_oracle_policy(const CostateParams& initial_guess, double horizon, double h) {
    auto q = std::make_shared<CostateParams>(initial_guess);
    return [q, horizon, h](double t_go, const EngagementState& z) {
        if (!(t_go > 0.0)) throw ExpiredHorizon("time-to-go must be positive");
        const double lambda = horizon / t_go;
        ShootingProblem prob;
        prob.z0 = EngagementState::make(lambda * z.x, lambda * z.y, z.theta);
        prob.horizon = horizon;
        prob.guess = *q;
        prob.h = h;
        const ShootingResult r = solve(prob);
        if (!r.converged) throw Error("shooting oracle did not converge");
        *q = r.q;
        return lambda * (q->px * prob.z0.y - q->py * prob.z0.x + q->c0);
    };
}

CostateParams oracle_initial_guess(const CanonicalScenario& c, double horizon, double search_horizon,
                                   const MultistartOptions& opts) {
    if (!(horizon > 0.0) || !(search_horizon > 0.0)) throw ConfigError("horizons must be positive");
    const double lambda = search_horizon / c.horizon;
    ShootingProblem prob;
    prob.z0 = EngagementState::make(lambda * c.pursuer0.x, lambda * c.pursuer0.y, c.pursuer0.theta);
    prob.horizon = search_horizon;
    const auto roots = multistart(prob, opts);
    if (roots.empty()) throw Error("no shooting start converged");
    const auto it = std::find_if(roots.begin(), roots.end(),
                                 [](const ShootingResult& r) { return r.disconjugate && r.colinear_free; });
    return scale_costate((it != roots.end() ? *it : roots.front()).q, horizon / search_horizon);
}

ClosedLoopScore closed_loop_score(const PolicyNetwork& net, std::span<const DatasetRecord> starts,
                                  const SimOptions& opts) {
    ClosedLoopScore sc;
    const Policy policy = network_policy(net);
    for (const auto& r : starts) {
        DimensionalScenario s;
        s.pursuer0 = EngagementState::make(r.state[0], r.state[1], r.state[2]);
        s.impact_time = net.horizon;
        const SimResult res = run_closed_loop(s, policy, opts);
        const double e = res.aborted ? 180.0 : std::abs(res.impact_angle_error) / kDegToRad;
        ++sc.runs;
        if (res.aborted) ++sc.aborted;
        sc.mean_angle_error_deg += e;
        sc.max_angle_error_deg = std::max(sc.max_angle_error_deg, e);
        sc.mean_miss += res.miss_distance;
    }
    if (sc.runs > 0) {
        sc.mean_angle_error_deg /= static_cast<double>(sc.runs);
        sc.mean_miss /= static_cast<double>(sc.runs);
    }
    return sc;
}

SelectionResult train_with_closed_loop_selection(const std::vector<DatasetRecord>& data, const TrainConfig& cfg,
                                                 double horizon, int candidates, std::size_t validation_runs,
                                                 const SimOptions& opts) {
    if (candidates < 1) throw ConfigError("at least one candidate is required");
    std::vector<DatasetRecord> tr;
    std::vector<DatasetRecord> va;
    split_dataset(data, cfg.validation_fraction, tr, va);
    std::vector<DatasetRecord> starts;
    for (const auto& r : va)
        if (std::hypot(r.state[0], r.state[1]) >= cfg.min_range) starts.push_back(r);
    if (starts.size() > validation_runs) {
        std::vector<DatasetRecord> picked;
        for (std::size_t k = 0; k < validation_runs; ++k) picked.push_back(starts[k * starts.size() / validation_runs]);
        starts.swap(picked);
    }

    SelectionResult out;
    for (int c = 0; c < candidates; ++c) {
        TrainConfig run = cfg;
        run.seed = cfg.seed + static_cast<std::uint64_t>(c);
        TrainResult tr_res = train(data, run, horizon);
        const ClosedLoopScore score = closed_loop_score(tr_res.net, starts, opts);
        out.scores.push_back(score);
        if (c == 0 || score.mean_angle_error_deg < out.scores[static_cast<std::size_t>(out.best_seed - cfg.seed)].mean_angle_error_deg) {
            out.best = std::move(tr_res);
            out.best_seed = run.seed;
        }
    }
    return out;
}

nlohmann::json sim_summary_json(const SimResult& r, const DimensionalScenario& sc) {
    return {{"miss_distance_m", r.miss_distance},
            {"impact_time_error_s", r.impact_time_error},
            {"impact_angle_error_deg", r.impact_angle_error / kDegToRad},
            {"control_effort", r.effort},
            {"saturation_fraction", r.saturation_fraction},
            {"aborted", r.aborted},
            {"abort_reason", r.abort_reason},
            {"impact_time_s", sc.impact_time},
            {"samples", r.trace.size()}};
}

void write_trace_csv(std::ostream& out, const SimResult& r) {
    out << "t,x,y,theta,u_cmd,u_app\n";
    char buf[256];
    for (const auto& p : r.trace) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.t, p.x, p.y, p.theta, p.u_cmd,
                      p.u_app);
        out << buf;
    }
}

}  // namespace tacnog
