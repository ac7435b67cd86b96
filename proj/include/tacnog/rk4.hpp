#pragma once

#include <array>
#include <cstddef>

namespace tacnog {

/// One classical Runge-Kutta step of ds/dt = f(t, s).
/// `f` has signature `std::array<double, N>(double t, const std::array<double, N>& s)`.
template <std::size_t N, class Rhs>
void rk4_step(std::array<double, N>& s, double t, double h, Rhs&& f) {
    using State = std::array<double, N>;
    auto axpy = [](const State& x, double a, const State& k) {
        State r;
        for (std::size_t i = 0; i < N; ++i) r[i] = x[i] + a * k[i];
        return r;
    };
    const State k1 = f(t, s);
    const State k2 = f(t + 0.5 * h, axpy(s, 0.5 * h, k1));
    const State k3 = f(t + 0.5 * h, axpy(s, 0.5 * h, k2));
    const State k4 = f(t + h, axpy(s, h, k3));
    for (std::size_t i = 0; i < N; ++i)
        s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

/// Number of uniform steps covering [0, span] with a step no larger than `h`.
inline std::size_t step_count(double span, double h) {
    const double n = span / h;
    auto k = static_cast<std::size_t>(n);
    if (n - static_cast<double>(k) > 1e-9) ++k;
    return k == 0 ? 1 : k;
}

}  // namespace tacnog
