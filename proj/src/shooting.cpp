#include "tacnog/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <omp.h>

#include "tacnog/errors.hpp"

namespace tacnog {

namespace {

constexpr double kDivergedResidual = 1e6;

// Shortest-arc difference in (-pi, pi]; an exact tie maps to +pi.
double arc_difference(double a, double b) { return wrap_angle(a - b); }

}  // namespace

double Residual::norm() const { return tacnog::norm(value); }

ResidualJacobian residual_with_jacobian(const CostateParams& q, const ShootingProblem& prob) {
    ResidualJacobian out;
    try {
        const TerminalFlow f = propagate_terminal(q, prob.horizon, prob.h);
        out.r.value = {f.z[0] - prob.z0.x, f.z[1] - prob.z0.y, arc_difference(f.z[2], prob.z0.theta)};
        out.jacobian = f.phi;
        out.effort = f.effort;
    } catch (const PropagationDiverged&) {
        out.r.value = {kDivergedResidual, kDivergedResidual, kDivergedResidual};
        out.r.diverged = true;
    }
    return out;
}

Residual residual(const CostateParams& q, const ShootingProblem& prob) { return residual_with_jacobian(q, prob).r; }

ShootingResult solve(const ShootingProblem& prob) {
    if (!(prob.horizon > 0.0)) throw ConfigError("shooting horizon must be positive");
    ShootingResult res;
    Vec3 q = prob.guess.as_vec();
    ResidualJacobian cur = residual_with_jacobian(prob.guess, prob);
    double rn = cur.r.norm();
    res.residual_history.push_back(rn);

    int it = 0;
    while (rn >= prob.residual_tol && it < prob.max_iterations && !cur.r.diverged) {
        const std::optional<Vec3> step =
            solve(cur.jacobian, Vec3{-cur.r.value[0], -cur.r.value[1], -cur.r.value[2]});
        if (!step) break;

        double alpha = 1.0;
        bool accepted = false;
        ResidualJacobian trial;
        Vec3 qt{};
        while (alpha > 1e-6) {
            for (int k = 0; k < 3; ++k) qt[k] = q[k] + alpha * (*step)[k];
            trial = residual_with_jacobian(CostateParams::from_vec(qt), prob);
            if (!trial.r.diverged && trial.r.norm() < (1.0 - 1e-4 * alpha) * rn) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++it;
        if (!accepted) break;
        q = qt;
        cur = trial;
        rn = cur.r.norm();
        res.residual_history.push_back(rn);
    }

    res.q = CostateParams::from_vec(q);
    res.iterations = it;
    res.residual_norm = rn;
    res.converged = rn < prob.residual_tol && !cur.r.diverged;
    res.effort = cur.effort;
    if (res.converged) {
        const ExtremalTrajectory traj = propagate_extremal(res.q, prob.horizon, prob.h);
        res.effort = traj.effort;
        res.disconjugate = traj.verdicts.disconjugate;
        res.colinear_free = traj.verdicts.colinear_free;
    }
    return res;
}

std::vector<ShootingResult> multistart(const ShootingProblem& prob, const MultistartOptions& opts) {
    const auto n = static_cast<std::size_t>(std::floor(2.0 * opts.q_range / opts.q_spacing + 1e-9)) + 1;
    const std::size_t total = n * n * n;
    auto axis = [&](std::size_t k) { return -opts.q_range + static_cast<double>(k) * opts.q_spacing; };

    std::vector<ShootingResult> all(total);
    const int threads = opts.workers > 0 ? opts.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long flat = 0; flat < static_cast<long long>(total); ++flat) {
        const auto f = static_cast<std::size_t>(flat);
        ShootingProblem p = prob;
        p.guess = {axis(f / (n * n)), axis((f / n) % n), axis(f % n)};
        all[f] = solve(p);
    }

    std::vector<ShootingResult> roots;
    for (const auto& r : all) {
        if (!r.converged) continue;
        const bool seen = std::any_of(roots.begin(), roots.end(), [&](const ShootingResult& o) {
            const Vec3 a = r.q.as_vec();
            const Vec3 b = o.q.as_vec();
            return norm(Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]}) < opts.cluster_radius;
        });
        if (!seen) roots.push_back(r);
    }
    std::stable_sort(roots.begin(), roots.end(),
                     [](const ShootingResult& a, const ShootingResult& b) { return a.effort < b.effort; });
    return roots;
}

nlohmann::json roots_to_json(const std::vector<ShootingResult>& roots) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : roots) {
        out.push_back({{"q", {r.q.px, r.q.py, r.q.c0}},
                       {"residual_norm", r.residual_norm},
                       {"effort", r.effort},
                       {"disconjugate", r.disconjugate},
                       {"colinear_free", r.colinear_free},
                       {"iterations", r.iterations}});
    }
    return out;
}

}  // namespace tacnog
