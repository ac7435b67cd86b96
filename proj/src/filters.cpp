#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "tacnog/extremal.hpp"

namespace tacnog {

bool check_disconjugacy(const ExtremalTrajectory& traj, double eps_t, double tol, double degenerate_floor) {
    const auto& s = traj.samples;
    auto first = std::find_if(s.begin(), s.end(), [eps_t](const ExtremalSample& p) { return p.t >= eps_t - 1e-12; });
    if (first == s.end()) return true;

    double max_abs = 0.0;
    for (auto it = first; it != s.end(); ++it) max_abs = std::max(max_abs, std::abs(it->delta));
    if (max_abs <= degenerate_floor) return true;

    const double band = tol * max_abs;
    int sign = 0;
    for (auto it = first; it != s.end(); ++it) {
        const double d = it->delta;
        if (sign == 0) {
            if (std::abs(d) >= band) sign = d > 0 ? 1 : -1;
            continue;
        }
        if (std::abs(d) < band || (d > 0 ? 1 : -1) != sign) return false;
    }
    return true;
}

namespace {

struct Run {
    std::size_t begin;  // first sample index
    std::size_t end;    // last sample index (inclusive)
    double lo;
    double hi;
};

std::vector<Run> monotone_runs(const std::vector<ExtremalSample>& s) {
    std::vector<Run> runs;
    const std::size_t n = s.size() - 1;
    int dir = 0;
    std::size_t start = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = s[k + 1].Theta - s[k].Theta;
        const int here = d > 0 ? 1 : (d < 0 ? -1 : dir);
        if (dir != 0 && here != dir) {
            runs.push_back({start, k, 0, 0});
            start = k;
        }
        if (here != 0) dir = here;
    }
    runs.push_back({start, n, 0, 0});
    for (auto& r : runs) {
        r.lo = std::min(s[r.begin].Theta, s[r.end].Theta);
        r.hi = std::max(s[r.begin].Theta, s[r.end].Theta);
    }
    return runs;
}

struct Point {
    double t;
    double x;
    double y;
};

// Point of run `r` whose heading equals `v` (v within the run's range).
Point invert_heading(const std::vector<ExtremalSample>& s, const Run& r, double v, double h) {
    const bool rising = s[r.end].Theta >= s[r.begin].Theta;
    std::size_t lo = r.begin;
    std::size_t hi = r.end;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if ((s[mid].Theta <= v) == rising)
            lo = mid;
        else
            hi = mid;
    }
    const ExtremalSample& a = s[lo];
    const ExtremalSample& b = s[hi];
    const double span = b.Theta - a.Theta;
    const double f = span != 0.0 ? std::clamp((v - a.Theta) / span, 0.0, 1.0) : 0.0;
    // Cubic Hermite on position; dP/dt = -(cos, sin) in the backward system.
    const double f2 = f * f;
    const double f3 = f2 * f;
    const double h00 = 2 * f3 - 3 * f2 + 1, h10 = f3 - 2 * f2 + f, h01 = -2 * f3 + 3 * f2, h11 = f3 - f2;
    const double x = h00 * a.X - h10 * h * std::cos(a.Theta) + h01 * b.X - h11 * h * std::cos(b.Theta);
    const double y = h00 * a.Y - h10 * h * std::sin(a.Theta) + h01 * b.Y - h11 * h * std::sin(b.Theta);
    return {a.t + f * (b.t - a.t), x, y};
}

struct Track {
    std::size_t last_i = 0;
    double last_mu = 0.0;
    double prev_mu = 0.0;  // value at last_i - 1 when consecutive
    bool has_prev = false;
};

}  // namespace

bool check_colinearity_free(const ExtremalTrajectory& traj, double tol_angle, double tol_chord,
                            double min_separation) {
    const auto& s = traj.samples;
    if (s.size() < 3) return true;
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end(), [](const auto& a, const auto& b) {
        return a.Theta < b.Theta;
    });
    if (mx->Theta - mn->Theta < tol_angle) return true;

    const std::vector<Run> runs = monotone_runs(s);
    const double h = traj.step;
    const double T = traj.horizon;
    const double coincide = tol_chord * h;
    std::map<std::pair<std::size_t, long>, Track> tracks;

    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const ExtremalSample& p = s[i];
        const double c = std::cos(p.Theta);
        const double sn = std::sin(p.Theta);
        for (std::size_t r = 0; r < runs.size(); ++r) {
            const Run& run = runs[r];
            const long m_lo = static_cast<long>(std::ceil((p.Theta - run.hi) / kPi));
            const long m_hi = static_cast<long>(std::floor((p.Theta - run.lo) / kPi));
            for (long m = m_lo; m <= m_hi; ++m) {
                if (m == 0 && i >= run.begin && i <= run.end) continue;
                const Point q = invert_heading(s, run, p.Theta - static_cast<double>(m) * kPi, h);
                if (q.t <= 0.0 || q.t >= T || std::abs(q.t - p.t) < min_separation) continue;

                const double dx = q.x - p.X;
                const double dy = q.y - p.Y;
                const double chord = std::hypot(dx, dy);
                if (chord <= coincide) return false;
                const double mu = (c * dy - sn * dx) / chord;
                if (mu == 0.0) return false;

                Track& tr = tracks[{r, m}];
                const bool consecutive = tr.last_i + 1 == i && tr.last_i != 0;
                if (consecutive) {
                    if (tr.last_mu * mu < 0.0) return false;
                    if (tr.has_prev && std::abs(tr.last_mu) < tol_chord && std::abs(tr.last_mu) < std::abs(tr.prev_mu) &&
                        std::abs(tr.last_mu) <= std::abs(mu))
                        return false;
                    tr.prev_mu = tr.last_mu;
                    tr.has_prev = true;
                } else {
                    tr.has_prev = false;
                }
                tr.last_i = i;
                tr.last_mu = mu;
            }
        }
    }
    return true;
}

}  // namespace tacnog
