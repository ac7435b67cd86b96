// Extremals of the minimum-effort problem, parameterized by q = (px, py, c0).
//
// The backward system starts at the canonical terminal state (0, 0, -pi/2) and
// integrates in time-to-go t:
//   X' = -cos(Theta),  Y' = -sin(Theta),  Theta' = -(px Y - py X + c0).
// The extremal control is U = px Y - py X + c0. Alongside Z we integrate the
// sensitivity Phi = dZ/dq, whose determinant is the disconjugacy function delta,
// and the running effort integral of U^2 / 2.
#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "tacnog/core_model.hpp"
#include "tacnog/linalg.hpp"

namespace tacnog {

inline constexpr double kDefaultStep = 1e-3;

struct CostateParams {
    double px = 0.0;
    double py = 0.0;
    double c0 = 0.0;

    Vec3 as_vec() const { return {px, py, c0}; }
    static CostateParams from_vec(const Vec3& v) { return {v[0], v[1], v[2]}; }
    bool operator==(const CostateParams&) const = default;
};

/// Backward-system state (X, Y, Theta); Theta is not wrapped.
using ExtremalState = Vec3;

inline double extremal_control(const ExtremalState& z, const CostateParams& q) {
    return q.px * z[1] - q.py * z[0] + q.c0;
}

Vec3 backward_rhs(const ExtremalState& z, const CostateParams& q);

/// d(Phi)/dt = A(Z, q) Phi + B(Z) with A = df/dZ and B = df/dq.
Mat3 variational_rhs(const ExtremalState& z, const Mat3& phi, const CostateParams& q);

/// p_x cos(Theta) + p_y sin(Theta) + U^2 / 2, the Hamiltonian with p_theta = U substituted.
double hamiltonian(const ExtremalState& z, double u, const CostateParams& q);

struct ExtremalSample {
    double t = 0.0;
    double X = 0.0;
    double Y = 0.0;
    double Theta = 0.0;
    double U = 0.0;
    double delta = 0.0;
    double H = 0.0;

    ExtremalState state() const { return {X, Y, Theta}; }
};

struct FilterVerdicts {
    bool disconjugate = false;
    bool colinear_free = false;

    bool optimal() const { return disconjugate && colinear_free; }
};

struct ExtremalTrajectory {
    CostateParams params;
    double horizon = 0.0;
    double step = 0.0;  // uniform sample spacing actually used
    std::vector<ExtremalSample> samples;
    Mat3 terminal_sensitivity;
    double effort = 0.0;  // integral of U^2/2 over [0, horizon]
    FilterVerdicts verdicts;

    const ExtremalSample& terminal() const { return samples.back(); }

    /// Extremal control at time-to-go t, cubic Hermite between samples.
    double control_at(double t) const;
};

/// State and sensitivity at the horizon only; used by the shooting solver.
struct TerminalFlow {
    ExtremalState z;
    Mat3 phi;
    double effort = 0.0;
};

/// Integrates the augmented system over [0, T] with fixed-step RK4 and no sample storage.
/// Throws PropagationDiverged on a non-finite state.
TerminalFlow propagate_terminal(const CostateParams& q, double T, double h = kDefaultStep);

/// Tunables for the two optimality filters. Zero means "derive from the step".
struct FilterOptions {
    double eps_t = 0.0;             // disconjugacy window start; default 10 h
    double delta_tol = 1e-9;        // near-zero band, relative to max |delta|
    double degenerate_floor = 1e-10;  // max |delta| below this marks a degenerate (straight) extremal
    double tol_angle = 0.0;         // default h
    double tol_chord = 0.0;         // default h
    double min_separation = 0.0;    // default 5 h
    bool colinearity = true;        // false skips the colinearity check; its verdict is then left true
};

/// Full propagation with samples, effort and both filter verdicts.
/// Preconditions T > 0 and 0 < h <= T (ConfigError otherwise); throws PropagationDiverged.
ExtremalTrajectory propagate_extremal(const CostateParams& q, double T, double h = kDefaultStep,
                                      const FilterOptions& opts = {});

/// Costate of the same extremal family on the horizon lambda T:
/// (p_x / lambda^2, p_y / lambda^2, c0 / lambda).
CostateParams scale_costate(const CostateParams& q, double lambda);

/// Largest deviation between the extremal of scale_costate(q, lambda) over
/// [0, lambda T] and the lambda-scaled extremal of q (positions times lambda,
/// heading unchanged, control divided by lambda), compared sample by sample with
/// steps h and lambda h.
double scaling_mismatch(const CostateParams& q, double T, double lambda, double h = kDefaultStep);

/// True iff delta keeps one sign and stays out of the near-zero band on [eps_t, T].
///
/// delta starts at zero and grows like a high power of t, so monitoring arms at the
/// first sample whose |delta| reaches tol * max|delta|; after that any sign flip or
/// return into the band is a violation. A trajectory with max|delta| below the
/// degenerate floor (the straight-line family, where dY/dq vanishes) passes.
bool check_disconjugacy(const ExtremalTrajectory& traj, double eps_t, double tol,
                        double degenerate_floor = FilterOptions{}.degenerate_floor);

/// False iff two interior instants have parallel headings and the chord between
/// them lies along that common heading (the two points share a tangent line).
///
/// Pairs of instants with headings equal mod pi are traced as continuous curves by
/// inverting the heading on its monotone runs; along each curve the chord/tangent
/// mismatch is flagged on a sign change or an interior dip below `tol_chord`.
/// Trajectories whose total heading variation is below `tol_angle` are straight
/// and pass. Pairs closer than `min_separation` in time are ignored.
bool check_colinearity_free(const ExtremalTrajectory& traj, double tol_angle, double tol_chord,
                            double min_separation);

/// Samples of a forward plant run: x' = cos(theta), y' = sin(theta), theta' = u(t).
struct ForwardTrajectory {
    std::vector<double> t;
    std::vector<EngagementState> states;

    const EngagementState& terminal() const { return states.back(); }
};

ForwardTrajectory forward_simulate(const EngagementState& z0, const std::function<double(double)>& control,
                                   double t_f, double h = kDefaultStep);

/// CSV dump with header `t,X,Y,Theta,U,delta,H`, 12 significant digits.
void write_trajectory_csv(std::ostream& out, const ExtremalTrajectory& traj);

}  // namespace tacnog
