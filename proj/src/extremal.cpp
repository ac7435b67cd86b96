#include "tacnog/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "tacnog/errors.hpp"
#include "tacnog/rk4.hpp"

namespace tacnog {

namespace {

// [X, Y, Theta, Phi (row-major), effort]
using Augmented = std::array<double, 13>;

// Same algebra as backward_rhs/variational_rhs with a single sin/cos evaluation.
Augmented augmented_rhs(const Augmented& s, const CostateParams& q) {
    const double sn = std::sin(s[2]);
    const double c = std::cos(s[2]);
    const double u = q.px * s[1] - q.py * s[0] + q.c0;

    Augmented d;
    d[0] = -c;
    d[1] = -sn;
    d[2] = -u;
    for (int j = 0; j < 3; ++j) {
        const double phi_theta = s[9 + j];
        d[3 + j] = sn * phi_theta;
        d[6 + j] = -c * phi_theta;
        d[9 + j] = q.py * s[3 + j] - q.px * s[6 + j];
    }
    d[9] -= s[1];
    d[10] += s[0];
    d[11] -= 1.0;
    d[12] = 0.5 * u * u;
    return d;
}

Augmented initial_augmented() {
    Augmented s{};
    s[2] = kCanonicalFinalHeading;
    return s;
}

bool all_finite(const Augmented& s) {
    return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}

Mat3 sensitivity_of(const Augmented& s) {
    Mat3 phi;
    std::copy(s.begin() + 3, s.begin() + 12, phi.a.begin());
    return phi;
}

void require_horizon(double T, double h) {
    if (!(T > 0.0) || !(h > 0.0) || h > T * (1.0 + 1e-12))
        throw ConfigError("propagation requires T > 0 and 0 < h <= T");
}

ExtremalSample make_sample(double t, const Augmented& s, const CostateParams& q) {
    const ExtremalState z{s[0], s[1], s[2]};
    const double u = extremal_control(z, q);
    return {t, z[0], z[1], z[2], u, det(sensitivity_of(s)), hamiltonian(z, u, q)};
}

}  // namespace

Vec3 backward_rhs(const ExtremalState& z, const CostateParams& q) {
    return {-std::cos(z[2]), -std::sin(z[2]), -extremal_control(z, q)};
}

Mat3 variational_rhs(const ExtremalState& z, const Mat3& phi, const CostateParams& q) {
    const double s = std::sin(z[2]);
    const double c = std::cos(z[2]);
    Mat3 d;
    for (int j = 0; j < 3; ++j) {
        d(0, j) = s * phi(2, j);
        d(1, j) = -c * phi(2, j);
        d(2, j) = q.py * phi(0, j) - q.px * phi(1, j);
    }
    d(2, 0) += -z[1];
    d(2, 1) += z[0];
    d(2, 2) += -1.0;
    return d;
}

double hamiltonian(const ExtremalState& z, double u, const CostateParams& q) {
    return q.px * std::cos(z[2]) + q.py * std::sin(z[2]) + 0.5 * u * u;
}

double ExtremalTrajectory::control_at(double t) const {
    const std::size_t n = samples.size() - 1;
    if (n == 0) return samples.front().U;
    t = std::clamp(t, 0.0, horizon);
    auto k = static_cast<std::size_t>(t / step);
    if (k >= n) k = n - 1;
    const ExtremalSample& a = samples[k];
    const ExtremalSample& b = samples[k + 1];
    const double s = (t - a.t) / step;
    auto du = [this](const ExtremalSample& p) {
        return -params.px * std::sin(p.Theta) + params.py * std::cos(p.Theta);
    };
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a.U + (s3 - 2 * s2 + s) * step * du(a) + (-2 * s3 + 3 * s2) * b.U +
           (s3 - s2) * step * du(b);
}

TerminalFlow propagate_terminal(const CostateParams& q, double T, double h) {
    require_horizon(T, h);
    const std::size_t n = step_count(T, h);
    const double hs = T / static_cast<double>(n);
    Augmented s = initial_augmented();
    auto f = [&q](double, const Augmented& x) { return augmented_rhs(x, q); };
    for (std::size_t k = 0; k < n; ++k) {
        rk4_step(s, static_cast<double>(k) * hs, hs, f);
        if (!all_finite(s)) throw PropagationDiverged("non-finite extremal state");
    }
    return {{s[0], s[1], s[2]}, sensitivity_of(s), s[12]};
}

ExtremalTrajectory propagate_extremal(const CostateParams& q, double T, double h, const FilterOptions& opts) {
    require_horizon(T, h);
    const std::size_t n = step_count(T, h);
    const double hs = T / static_cast<double>(n);

    ExtremalTrajectory traj;
    traj.params = q;
    traj.horizon = T;
    traj.step = hs;
    traj.samples.reserve(n + 1);

    Augmented s = initial_augmented();
    traj.samples.push_back(make_sample(0.0, s, q));
    traj.samples.back().delta = 0.0;
    auto f = [&q](double, const Augmented& x) { return augmented_rhs(x, q); };
    for (std::size_t k = 0; k < n; ++k) {
        rk4_step(s, static_cast<double>(k) * hs, hs, f);
        if (!all_finite(s)) throw PropagationDiverged("non-finite extremal state");
        const double t = k + 1 == n ? T : static_cast<double>(k + 1) * hs;
        traj.samples.push_back(make_sample(t, s, q));
    }
    traj.terminal_sensitivity = sensitivity_of(s);
    traj.effort = s[12];

    const double eps_t = opts.eps_t > 0.0 ? opts.eps_t : 10.0 * hs;
    const double tol_angle = opts.tol_angle > 0.0 ? opts.tol_angle : hs;
    const double tol_chord = opts.tol_chord > 0.0 ? opts.tol_chord : hs;
    const double min_sep = opts.min_separation > 0.0 ? opts.min_separation : 5.0 * hs;
    traj.verdicts.disconjugate = check_disconjugacy(traj, eps_t, opts.delta_tol, opts.degenerate_floor);
    traj.verdicts.colinear_free = !opts.colinearity || check_colinearity_free(traj, tol_angle, tol_chord, min_sep);
    return traj;
}

CostateParams scale_costate(const CostateParams& q, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("scale factor must be positive");
    return {q.px / (lambda * lambda), q.py / (lambda * lambda), q.c0 / lambda};
}

double scaling_mismatch(const CostateParams& q, double T, double lambda, double h) {
    const ExtremalTrajectory a = propagate_extremal(q, T, h);
    const ExtremalTrajectory b = propagate_extremal(scale_costate(q, lambda), lambda * T, lambda * h);
    if (a.samples.size() != b.samples.size()) throw ConfigError("scaled propagation changed the step count");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.samples.size(); ++k) {
        const ExtremalSample& p = a.samples[k];
        const ExtremalSample& r = b.samples[k];
        worst = std::max({worst, std::abs(r.X - lambda * p.X), std::abs(r.Y - lambda * p.Y),
                          std::abs(r.Theta - p.Theta), std::abs(r.U - p.U / lambda)});
    }
    return worst;
}

ForwardTrajectory forward_simulate(const EngagementState& z0, const std::function<double(double)>& control,
                                   double t_f, double h) {
    if (!(t_f > 0.0) || !(h > 0.0)) throw ConfigError("forward simulation requires t_f > 0 and h > 0");
    const std::size_t n = step_count(t_f, h);
    const double hs = t_f / static_cast<double>(n);

    ForwardTrajectory out;
    out.t.reserve(n + 1);
    out.states.reserve(n + 1);
    std::array<double, 3> s{z0.x, z0.y, z0.theta};
    out.t.push_back(0.0);
    out.states.push_back(EngagementState::make(s[0], s[1], s[2]));
    auto f = [&control](double t, const std::array<double, 3>& x) {
        return std::array<double, 3>{std::cos(x[2]), std::sin(x[2]), control(t)};
    };
    for (std::size_t k = 0; k < n; ++k) {
        rk4_step(s, static_cast<double>(k) * hs, hs, f);
        const double t = k + 1 == n ? t_f : static_cast<double>(k + 1) * hs;
        out.t.push_back(t);
        out.states.push_back(EngagementState::make(s[0], s[1], s[2]));
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const ExtremalTrajectory& traj) {
    out << "t,X,Y,Theta,U,delta,H\n";
    char buf[256];
    for (const auto& p : traj.samples) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.t, p.X, p.Y, p.Theta, p.U,
                      p.delta, p.H);
        out << buf;
    }
}

}  // namespace tacnog
