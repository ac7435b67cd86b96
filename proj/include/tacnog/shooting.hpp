// Indirect shooting on the q-parameterized extremal flow.
//
// The unknown is q; the residual is the mismatch between Z(t_f, q) and the
// prescribed canonical initial state. The Jacobian is the propagated
// sensitivity Phi(t_f). Converged roots are audited with both optimality
// filters but never rejected: shooting only enforces necessary conditions.
#pragma once

#include <vector>

#include <json.hpp>

#include "tacnog/core_model.hpp"
#include "tacnog/extremal.hpp"

namespace tacnog {

struct ShootingProblem {
    EngagementState z0;  // canonical frame
    double horizon = 1.0;
    CostateParams guess;
    double residual_tol = 1e-9;
    int max_iterations = 60;
    double h = kDefaultStep;
};

struct Residual {
    Vec3 value{};
    bool diverged = false;

    double norm() const;
};

/// (X(t_f) - x0, Y(t_f) - y0, wrap(Theta(t_f) - theta0)); a diverged propagation
/// returns a large sentinel with `diverged` set.
Residual residual(const CostateParams& q, const ShootingProblem& prob);

/// Residual together with its Jacobian Phi(t_f).
struct ResidualJacobian {
    Residual r;
    Mat3 jacobian;
    double effort = 0.0;
};
ResidualJacobian residual_with_jacobian(const CostateParams& q, const ShootingProblem& prob);

struct ShootingResult {
    CostateParams q;
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;  // norm at each iterate, starting with the guess
    double effort = 0.0;
    bool disconjugate = false;
    bool colinear_free = false;
};

/// Damped Newton with backtracking. On convergence the extremal is re-propagated
/// to fill effort and filter verdicts.
ShootingResult solve(const ShootingProblem& prob);

struct MultistartOptions {
    double q_range = 8.0;
    double q_spacing = 2.0;
    double cluster_radius = 1e-4;
    int workers = 0;
};

/// Solves from every guess on a cubic grid and returns the distinct converged
/// roots sorted by effort. Solves run in parallel; the reduction is ordered.
std::vector<ShootingResult> multistart(const ShootingProblem& prob, const MultistartOptions& opts = {});

/// Root report: [{q, residual_norm, effort, disconjugate, colinear_free, iterations}, ...].
nlohmann::json roots_to_json(const std::vector<ShootingResult>& roots);

}  // namespace tacnog
