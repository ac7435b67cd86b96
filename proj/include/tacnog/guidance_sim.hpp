// Closed-loop engagement simulation: zero-order-hold guidance over the ideal
// constant-speed plant, with saturation applied in dimensional units.
#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacnog/core_model.hpp"
#include "tacnog/extremal.hpp"
#include "tacnog/policy_net.hpp"
#include "tacnog/shooting.hpp"

namespace tacnog {

/// Canonical-frame feedback law: (time-to-go, canonical state) -> canonical control.
using Policy = std::function<double(double t_go, const EngagementState& z_c)>;

struct SimOptions {
    double dt = 0.0;                // guidance step [s]; 0 means 0.01 t_f
    double h = 0.0;                 // plant step [s]; 0 means dt / 10
    double hold_steps = 3.0;        // commands are held once t_go < hold_steps * dt
};

struct TraceSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double u_cmd = 0.0;
    double u_app = 0.0;
};

struct SimResult {
    std::vector<TraceSample> trace;
    double miss_distance = 0.0;       // [m], minimum over the final guidance interval
    double impact_time_error = 0.0;   // [s], time of that minimum minus t_f
    double impact_angle_error = 0.0;  // [rad], shortest arc
    double effort = 0.0;              // [m^2/s^3]
    double saturation_fraction = 0.0; // share of guidance steps with |u_cmd| > a_max
    bool aborted = false;
    std::string abort_reason;
};

/// Throws ConfigError unless dt >= h > 0. A throwing or non-finite policy aborts
/// the run and returns the partial trace.
SimResult run_closed_loop(const DimensionalScenario& sc, const Policy& policy, const SimOptions& opts = {});

/// Trapezoidal integral of u_app^2 / 2 over the trace.
double control_effort(std::span<const TraceSample> trace);

Policy network_policy(const PolicyNetwork& net);

/// Exact feedback law: re-solves the shooting problem at every query, warm-started
/// from the previous root. The problem is posed at the reference horizon
/// `horizon` through the time-to-go scaling, so the result is
/// (T/t_go) U(T, q) for the root q reaching the scaled state.
Policy shooting_oracle_policy(const CostateParams& initial_guess, double horizon = 1.5, double h = kDefaultStep);

/// Initial costate for the oracle: the lowest-effort multistart root that passes
/// both filters (lowest-effort root if none does), found on the engagement scaled
/// to `search_horizon` and returned for the reference horizon `horizon`.
/// Throws Error when no start converges.
CostateParams oracle_initial_guess(const CanonicalScenario& c, double horizon = 1.5, double search_horizon = 3.0,
                                   const MultistartOptions& opts = {});

struct ClosedLoopScore {
    std::size_t runs = 0;
    std::size_t aborted = 0;
    double mean_angle_error_deg = 0.0;
    double max_angle_error_deg = 0.0;
    double mean_miss = 0.0;
};

/// Flies the network from each record's state over the network horizon (unit
/// speed, target at the origin, canonical final heading) and aggregates the
/// terminal errors. Aborted runs count as 180 degrees.
ClosedLoopScore closed_loop_score(const PolicyNetwork& net, std::span<const DatasetRecord> starts,
                                  const SimOptions& opts = {});

/// Trains `candidates` networks with seeds cfg.seed, cfg.seed + 1, ... and keeps the
/// one with the lowest mean terminal angle error on `validation_runs` closed-loop
/// runs started from validation-split records at range >= cfg.min_range.
struct SelectionResult {
    TrainResult best;
    std::uint64_t best_seed = 0;
    std::vector<ClosedLoopScore> scores;  // one per candidate
};
SelectionResult train_with_closed_loop_selection(const std::vector<DatasetRecord>& data, const TrainConfig& cfg,
                                                 double horizon, int candidates, std::size_t validation_runs = 40,
                                                 const SimOptions& opts = {});

nlohmann::json sim_summary_json(const SimResult& r, const DimensionalScenario& sc);
/// CSV with header `t,x,y,theta,u_cmd,u_app`.
void write_trace_csv(std::ostream& out, const SimResult& r);

}  // namespace tacnog
